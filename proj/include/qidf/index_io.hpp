#pragma once

// Binary index file, version 1. All integers and reals little-endian.
//
//   offset  bytes  field
//   0       8      magic "QIDFIDX\x1a"
//   8       4      u32 format version (1)
//   12      1      u8  real width in bytes (4 = float32, 8 = float64)
//   13      1      u8  scorer (0 = bm25, 1 = dph)
//   14      1      u8  tokenizer mode (0..3 = t0..t3)
//   15      1      u8  flags (bit 0: q applied, bit 1: gamma applied)
//   16      8      f64 k1
//   24      8      f64 b
//   32      8      f64 delta (0.5)
//   40      8      f64 applied q (NaN when none)
//   48      8      f64 applied gamma (NaN when none)
//   56      8      u64 N (documents)
//   64      8      u64 |V| (terms)
//   72      8      u64 nnz
//   80      ...    N x (u32 byte length, bytes) document ids
//          ...    N x u32 document lengths in tokens
//          ...    |V| x (u32 byte length, bytes) terms, sorted
//          ...    (|V| + 1) x u64 col_ptr
//          ...    nnz x u32 row_idx
//          ...    nnz x real scores
//          8      trailer "QIDFEND\0"
//
// Every field has a fixed width, so applying a transform never changes the file size.

#include <array>
#include <bit>
#include <concepts>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "qidf/errors.hpp"
#include "qidf/index.hpp"

namespace qidf {

static_assert(std::endian::native == std::endian::little, "index files are written in host byte order");

inline constexpr std::uint32_t kIndexFormatVersion = 1;
inline constexpr std::array<char, 8> kIndexMagic = {'Q', 'I', 'D', 'F', 'I', 'D', 'X', '\x1a'};
inline constexpr std::array<char, 8> kIndexTrailer = {'Q', 'I', 'D', 'F', 'E', 'N', 'D', '\0'};

namespace detail {

class BinaryWriter {
public:
    explicit BinaryWriter(std::ostream& out) : out_(out) {}

    template <typename T>
    void put(const T& value)
    {
        out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
    }

    template <typename T>
    void put_array(const std::vector<T>& values)
    {
        if (!values.empty()) {
            out_.write(reinterpret_cast<const char*>(values.data()),
                       static_cast<std::streamsize>(values.size() * sizeof(T)));
        }
    }

    template <typename T>
    void put_array(std::span<const T> values)
    {
        if (!values.empty()) {
            out_.write(reinterpret_cast<const char*>(values.data()),
                       static_cast<std::streamsize>(values.size() * sizeof(T)));
        }
    }

    void put_string(const std::string& s)
    {
        put(static_cast<std::uint32_t>(s.size()));
        out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }

    void put_bytes(const std::array<char, 8>& bytes) { out_.write(bytes.data(), bytes.size()); }

private:
    std::ostream& out_;
};

class BinaryReader {
public:
    explicit BinaryReader(std::istream& in) : in_(in) {}

    template <typename T>
    T get()
    {
        T value{};
        read(reinterpret_cast<char*>(&value), sizeof(T));
        return value;
    }

    template <typename T>
    std::vector<T> get_array(std::uint64_t count)
    {
        check_count(count, sizeof(T));
        std::vector<T> values(count);
        read(reinterpret_cast<char*>(values.data()), count * sizeof(T));
        return values;
    }

    std::string get_string()
    {
        auto len = get<std::uint32_t>();
        check_count(len, 1);
        std::string s(len, '\0');
        read(s.data(), len);
        return s;
    }

    std::array<char, 8> get_bytes()
    {
        std::array<char, 8> bytes{};
        read(bytes.data(), bytes.size());
        return bytes;
    }

private:
    void read(char* dst, std::uint64_t n)
    {
        if (n == 0) {
            return;
        }
        in_.read(dst, static_cast<std::streamsize>(n));
        if (static_cast<std::uint64_t>(in_.gcount()) != n) {
            throw FormatError("index file is truncated or corrupt");
        }
    }

    // Rejects counts that cannot fit in the remaining stream before allocating.
    void check_count(std::uint64_t count, std::size_t width)
    {
        auto here = in_.tellg();
        if (here < 0) {
            return;
        }
        in_.seekg(0, std::ios::end);
        auto end = in_.tellg();
        in_.seekg(here);
        if (count > static_cast<std::uint64_t>(end - here) / width) {
            throw FormatError("index file is truncated or corrupt");
        }
    }

    std::istream& in_;
};

} // namespace detail

template <std::floating_point Real>
void write_index(std::ostream& out, const BasicScoreIndex<Real>& index)
{
    detail::BinaryWriter w(out);
    const auto& h = index.header();
    w.put_bytes(kIndexMagic);
    w.put(kIndexFormatVersion);
    w.put(static_cast<std::uint8_t>(sizeof(Real)));
    w.put(static_cast<std::uint8_t>(h.scorer));
    w.put(static_cast<std::uint8_t>(h.mode));
    std::uint8_t flags = (h.applied_q ? 1U : 0U) | (h.applied_gamma ? 2U : 0U);
    w.put(flags);
    w.put(h.k1);
    w.put(h.b);
    w.put(BuildParams::delta);
    w.put(h.applied_q.value_or(std::numeric_limits<double>::quiet_NaN()));
    w.put(h.applied_gamma.value_or(std::numeric_limits<double>::quiet_NaN()));
    w.put(static_cast<std::uint64_t>(index.num_docs()));
    w.put(static_cast<std::uint64_t>(index.num_terms()));
    w.put(static_cast<std::uint64_t>(index.nnz()));
    for (const auto& id : index.doc_ids()) {
        w.put_string(id);
    }
    w.put_array(index.doc_lengths());
    for (const auto& term : index.terms()) {
        w.put_string(term);
    }
    w.put_array(index.col_ptr());
    w.put_array(index.row_idx());
    w.put_array(index.scores());
    w.put_bytes(kIndexTrailer);
    if (!out) {
        throw Error("failed writing index");
    }
}

template <std::floating_point Real = float>
BasicScoreIndex<Real> read_index(std::istream& in)
{
    detail::BinaryReader r(in);
    if (r.get_bytes() != kIndexMagic) {
        throw FormatError("not an index file (bad magic)");
    }
    auto version = r.get<std::uint32_t>();
    if (version != kIndexFormatVersion) {
        throw VersionError("unsupported index format version " + std::to_string(version) + " (expected "
                           + std::to_string(kIndexFormatVersion) + ")");
    }
    auto width = r.get<std::uint8_t>();
    if (width != sizeof(Real)) {
        throw FormatError("index stores " + std::to_string(width * 8) + "-bit scores, reader expects "
                          + std::to_string(sizeof(Real) * 8) + "-bit");
    }
    IndexHeader h;
    auto scorer = r.get<std::uint8_t>();
    auto mode = r.get<std::uint8_t>();
    auto flags = r.get<std::uint8_t>();
    if (scorer > 1 || mode > 3 || flags > 3) {
        throw FormatError("corrupt index header");
    }
    h.scorer = static_cast<Scorer>(scorer);
    h.mode = static_cast<TokenizerMode>(mode);
    h.k1 = r.get<double>();
    h.b = r.get<double>();
    (void)r.get<double>(); // delta
    double q = r.get<double>();
    double gamma = r.get<double>();
    if (flags & 1U) {
        h.applied_q = q;
    }
    if (flags & 2U) {
        h.applied_gamma = gamma;
    }
    auto n_docs = r.get<std::uint64_t>();
    auto n_terms = r.get<std::uint64_t>();
    auto nnz = r.get<std::uint64_t>();
    if (n_docs > std::numeric_limits<std::uint32_t>::max()) {
        throw FormatError("document count exceeds 32-bit row indices");
    }

    std::vector<std::string> doc_ids;
    doc_ids.reserve(std::min<std::uint64_t>(n_docs, 1U << 20));
    for (std::uint64_t d = 0; d < n_docs; ++d) {
        doc_ids.push_back(r.get_string());
    }
    auto doc_len = r.get_array<std::uint32_t>(n_docs);
    std::vector<std::string> terms;
    terms.reserve(std::min<std::uint64_t>(n_terms, 1U << 20));
    for (std::uint64_t t = 0; t < n_terms; ++t) {
        terms.push_back(r.get_string());
    }
    auto col_ptr = r.get_array<std::uint64_t>(n_terms + 1);
    auto row_idx = r.get_array<std::uint32_t>(nnz);
    auto scores = r.get_array<Real>(nnz);
    if (r.get_bytes() != kIndexTrailer) {
        throw FormatError("index file is truncated or corrupt (bad trailer)");
    }
    return BasicScoreIndex<Real>::from_parts(h, std::move(terms), std::move(col_ptr), std::move(row_idx),
                                             std::move(scores), std::move(doc_ids), std::move(doc_len));
}

template <std::floating_point Real>
void save_index(const BasicScoreIndex<Real>& index, const std::string& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write index '" + path + "'");
    }
    write_index(out, index);
}

template <std::floating_point Real = float>
BasicScoreIndex<Real> load_index(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open index '" + path + "'");
    }
    return read_index<Real>(in);
}

/// Byte size of the serialized form.
template <std::floating_point Real>
std::uint64_t serialized_size(const BasicScoreIndex<Real>& index)
{
    std::uint64_t bytes = 80 + 8;
    for (const auto& id : index.doc_ids()) {
        bytes += 4 + id.size();
    }
    bytes += 4 * index.num_docs();
    for (const auto& term : index.terms()) {
        bytes += 4 + term.size();
    }
    bytes += 8 * (index.num_terms() + 1) + 4 * index.nnz() + sizeof(Real) * index.nnz();
    return bytes;
}

} // namespace qidf
