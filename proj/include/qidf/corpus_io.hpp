#pragma once

#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qidf/errors.hpp"

namespace qidf {

struct Document {
    std::string doc_id;
    std::string text;
};

/// Ordered document collection. File order defines the dense indices 0..N-1.
class Corpus {
public:
    Corpus() = default;

    /// Appends a document; returns false (and leaves the corpus unchanged) on a duplicate id.
    bool add(Document doc)
    {
        auto [it, inserted] = by_id_.emplace(doc.doc_id, docs_.size());
        if (!inserted) {
            return false;
        }
        docs_.push_back(std::move(doc));
        return true;
    }

    std::size_t size() const noexcept { return docs_.size(); }
    bool empty() const noexcept { return docs_.empty(); }
    const Document& operator[](std::size_t i) const { return docs_[i]; }
    auto begin() const noexcept { return docs_.begin(); }
    auto end() const noexcept { return docs_.end(); }

    /// Dense index of `doc_id`, or npos.
    std::size_t index_of(const std::string& doc_id) const
    {
        auto it = by_id_.find(doc_id);
        return it == by_id_.end() ? npos : it->second;
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::vector<Document> docs_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

struct Query {
    std::string query_id;
    std::string text;
};

using QuerySet = std::vector<Query>;

/// query_id -> doc_id -> graded relevance (>= 0).
struct QrelSet {
    std::map<std::string, std::map<std::string, int>> judgments;
    /// Rows that repeated an earlier (query, doc) pair; the later value wins.
    std::size_t duplicate_rows = 0;

    const std::map<std::string, int>* find(const std::string& query_id) const
    {
        auto it = judgments.find(query_id);
        return it == judgments.end() ? nullptr : &it->second;
    }
};

enum class CorpusFormat { jsonl, tsv };

namespace detail {

inline bool is_blank(std::string_view line)
{
    return line.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

inline void strip_cr(std::string& line)
{
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
}

inline std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open '" + path + "'");
    }
    return in;
}

inline std::string json_string_field(const nlohmann::json& record, const char* field,
                                     const std::string& source, std::size_t line_no)
{
    auto it = record.find(field);
    if (it == record.end()) {
        throw ParseError(source, line_no, std::string("missing field '") + field + "'");
    }
    if (!it->is_string()) {
        throw ParseError(source, line_no, std::string("field '") + field + "' is not a string");
    }
    return it->get<std::string>();
}

inline nlohmann::json parse_json_line(const std::string& line, const std::string& source,
                                      std::size_t line_no)
{
    nlohmann::json record;
    try {
        record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(source, line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!record.is_object()) {
        throw ParseError(source, line_no, "record is not a JSON object");
    }
    return record;
}

} // namespace detail

/// Reads a corpus. JSONL records carry `doc_id` and `text`; TSV rows are `doc_id<TAB>text`.
/// Blank lines are skipped. `source` names the input in error messages.
inline Corpus read_corpus(std::istream& in, CorpusFormat format, const std::string& source = "<corpus>")
{
    Corpus corpus;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        detail::strip_cr(line);
        if (detail::is_blank(line)) {
            continue;
        }
        Document doc;
        if (format == CorpusFormat::jsonl) {
            auto record = detail::parse_json_line(line, source, line_no);
            doc.doc_id = detail::json_string_field(record, "doc_id", source, line_no);
            doc.text = detail::json_string_field(record, "text", source, line_no);
        } else {
            auto tab = line.find('\t');
            if (tab == std::string::npos) {
                throw ParseError(source, line_no, "expected doc_id<TAB>text");
            }
            doc.doc_id = line.substr(0, tab);
            doc.text = line.substr(tab + 1);
        }
        if (doc.doc_id.empty()) {
            throw ParseError(source, line_no, "empty doc_id");
        }
        std::string id = doc.doc_id;
        if (!corpus.add(std::move(doc))) {
            throw DuplicateIdError(source, line_no, id);
        }
    }
    return corpus;
}

inline Corpus load_corpus(const std::string& path, CorpusFormat format = CorpusFormat::jsonl)
{
    auto in = detail::open_input(path);
    return read_corpus(in, format, path);
}

inline void write_corpus(std::ostream& out, const Corpus& corpus)
{
    for (const auto& doc : corpus) {
        nlohmann::json record = {{"doc_id", doc.doc_id}, {"text", doc.text}};
        out << record.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
    }
}

inline void save_corpus(const std::string& path, const Corpus& corpus)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write '" + path + "'");
    }
    write_corpus(out, corpus);
}

inline QuerySet read_queries(std::istream& in, const std::string& source = "<queries>")
{
    QuerySet queries;
    std::unordered_map<std::string, std::size_t> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        detail::strip_cr(line);
        if (detail::is_blank(line)) {
            continue;
        }
        auto record = detail::parse_json_line(line, source, line_no);
        Query q{detail::json_string_field(record, "query_id", source, line_no),
                detail::json_string_field(record, "text", source, line_no)};
        if (q.query_id.empty()) {
            throw ParseError(source, line_no, "empty query_id");
        }
        if (!seen.emplace(q.query_id, queries.size()).second) {
            throw DuplicateIdError(source, line_no, q.query_id);
        }
        queries.push_back(std::move(q));
    }
    return queries;
}

inline QuerySet load_queries(const std::string& path)
{
    auto in = detail::open_input(path);
    return read_queries(in, path);
}

/// Reads whitespace-separated `query_id doc_id relevance` rows. A leading
/// `query-id corpus-id score` header (the BEIR export layout) is skipped.
inline QrelSet read_qrels(std::istream& in, const std::string& source = "<qrels>")
{
    QrelSet qrels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        detail::strip_cr(line);
        if (detail::is_blank(line)) {
            continue;
        }
        std::vector<std::string> cols;
        std::size_t pos = 0;
        while (pos < line.size()) {
            auto start = line.find_first_not_of(" \t", pos);
            if (start == std::string::npos) {
                break;
            }
            auto stop = line.find_first_of(" \t", start);
            if (stop == std::string::npos) {
                stop = line.size();
            }
            cols.push_back(line.substr(start, stop - start));
            pos = stop;
        }
        if (line_no == 1 && cols.size() == 3 && cols[0] == "query-id" && cols[1] == "corpus-id"
            && cols[2] == "score") {
            continue;
        }
        if (cols.size() != 3) {
            throw ParseError(source, line_no,
                             "expected 3 columns (query_id doc_id relevance), got "
                                 + std::to_string(cols.size()));
        }
        const std::string& rel_text = cols[2];
        std::size_t consumed = 0;
        long rel = 0;
        try {
            rel = std::stol(rel_text, &consumed);
        } catch (const std::exception&) {
            consumed = 0;
        }
        if (consumed != rel_text.size() || consumed == 0) {
            throw ParseError(source, line_no, "relevance '" + rel_text + "' is not an integer");
        }
        if (rel < 0) {
            throw ParseError(source, line_no, "relevance " + rel_text + " is negative");
        }
        auto& slot = qrels.judgments[cols[0]];
        auto [it, inserted] = slot.insert_or_assign(cols[1], static_cast<int>(rel));
        if (!inserted) {
            ++qrels.duplicate_rows;
        }
    }
    return qrels;
}

inline QrelSet load_qrels(const std::string& path)
{
    auto in = detail::open_input(path);
    return read_qrels(in, path);
}

/// Throws if a judged query is missing from `queries`.
inline void validate_qrels(const QrelSet& qrels, const QuerySet& queries)
{
    std::unordered_map<std::string_view, bool> known;
    for (const auto& q : queries) {
        known.emplace(q.query_id, true);
    }
    for (const auto& [qid, docs] : qrels.judgments) {
        if (!known.count(qid)) {
            throw Error("qrels reference unknown query '" + qid + "'");
        }
    }
}

} // namespace qidf
