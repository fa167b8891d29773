#pragma once

// Test-only helpers: seeded corpus generators and reference scorers written
// directly from the formulas, sharing no code with the index builders.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "qidf/corpus_io.hpp"
#include "qidf/tokenizer.hpp"

namespace qidf_test {

inline std::string vocab_word(std::size_t i)
{
    return "w" + std::to_string(i);
}

struct RandomCorpusSpec {
    std::size_t docs = 30;
    std::size_t vocab = 100;
    std::size_t max_len = 30;
    double zipf_s = 1.1;
};

/// Documents of Zipf-distributed words "w0".."w{vocab-1}". Some documents may be empty.
inline qidf::Corpus random_corpus(std::mt19937_64& rng, const RandomCorpusSpec& spec)
{
    std::vector<double> weights;
    for (std::size_t i = 0; i < spec.vocab; ++i) {
        weights.push_back(1.0 / std::pow(static_cast<double>(i + 1), spec.zipf_s));
    }
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    std::uniform_int_distribution<std::size_t> len(0, spec.max_len);
    qidf::Corpus corpus;
    for (std::size_t d = 0; d < spec.docs; ++d) {
        std::string text;
        std::size_t n = len(rng);
        for (std::size_t i = 0; i < n; ++i) {
            text += vocab_word(pick(rng));
            text += ' ';
        }
        if (d == 0 && n == 0) {
            text = vocab_word(0);
        }
        corpus.add({"doc" + std::to_string(d), text});
    }
    return corpus;
}

/// 1-5 words drawn uniformly from a range slightly wider than the vocabulary,
/// so some query words are out of vocabulary.
inline std::string random_query(std::mt19937_64& rng, std::size_t vocab)
{
    std::uniform_int_distribution<std::size_t> count(1, 5);
    std::uniform_int_distribution<std::size_t> word(0, vocab + vocab / 10);
    std::string text;
    for (std::size_t i = 0, n = count(rng); i < n; ++i) {
        text += vocab_word(word(rng)) + " ";
    }
    return text;
}

/// Brute-force BM25 over raw per-document term counts.
class DenseBm25 {
public:
    DenseBm25(const qidf::Corpus& corpus, qidf::TokenizerMode mode, double k1 = 1.5, double b = 0.75)
        : mode_(mode), k1_(k1), b_(b)
    {
        double total = 0.0;
        for (const auto& doc : corpus) {
            std::map<std::string, double> tf;
            auto tokens = qidf::tokenize(doc.text, mode);
            for (const auto& t : tokens) {
                tf[t] += 1.0;
            }
            for (const auto& [t, c] : tf) {
                df_[t] += 1.0;
            }
            len_.push_back(static_cast<double>(tokens.size()));
            total += static_cast<double>(tokens.size());
            tf_.push_back(std::move(tf));
        }
        n_ = static_cast<double>(corpus.size());
        avg_ = total / n_;
    }

    double idf(const std::string& term, double q) const
    {
        double n = df_.at(term);
        double odds = (n_ - n + 0.5) / (n + 0.5);
        double lucene = std::log(1.0 + odds);
        if (q == 1.0) {
            return lucene;
        }
        return (std::pow(odds, 1.0 - q) - 1.0) / (1.0 - q);
    }

    double gamma_idf(const std::string& term, double gamma) const
    {
        double n = df_.at(term);
        return std::pow(std::log(1.0 + (n_ - n + 0.5) / (n + 0.5)), gamma);
    }

    double tf_part(std::size_t d, const std::string& term) const
    {
        auto it = tf_[d].find(term);
        if (it == tf_[d].end()) {
            return 0.0;
        }
        double f = it->second;
        return f * (k1_ + 1.0) / (f + k1_ * (1.0 - b_ + b_ * len_[d] / avg_));
    }

    /// Per-document score contributions of each query token, for q (q == 1 is BM25).
    std::vector<std::vector<double>> contributions(const std::string& query, double q) const
    {
        std::vector<std::vector<double>> out(tf_.size());
        for (const auto& t : qidf::tokenize(query, mode_)) {
            if (!df_.count(t)) {
                continue;
            }
            double w = idf(t, q);
            for (std::size_t d = 0; d < tf_.size(); ++d) {
                double part = tf_part(d, t);
                if (part != 0.0) {
                    out[d].push_back(w * part);
                }
            }
        }
        return out;
    }

    std::vector<double> scores(const std::string& query, double q = 1.0) const
    {
        std::vector<double> s;
        for (const auto& parts : contributions(query, q)) {
            double sum = 0.0;
            for (double p : parts) {
                sum += p;
            }
            s.push_back(sum);
        }
        return s;
    }

    std::size_t docs() const { return tf_.size(); }

private:
    qidf::TokenizerMode mode_;
    double k1_;
    double b_;
    double n_ = 0.0;
    double avg_ = 0.0;
    std::vector<std::map<std::string, double>> tf_;
    std::vector<double> len_;
    std::map<std::string, double> df_;
};

/// Reference DPH scorer over raw counts: natural logs converted to base 2,
/// per-query dense accumulation, no shared code with the index builder.
class DenseDph {
public:
    DenseDph(const qidf::Corpus& corpus, qidf::TokenizerMode mode) : mode_(mode)
    {
        double total = 0.0;
        for (const auto& doc : corpus) {
            std::map<std::string, double> tf;
            auto tokens = qidf::tokenize(doc.text, mode);
            for (const auto& t : tokens) {
                tf[t] += 1.0;
                cf_[t] += 1.0;
            }
            len_.push_back(static_cast<double>(tokens.size()));
            total += static_cast<double>(tokens.size());
            tf_.push_back(std::move(tf));
        }
        n_ = static_cast<double>(corpus.size());
        avg_ = total / n_;
    }

    double weight(std::size_t d, const std::string& term) const
    {
        auto it = tf_[d].find(term);
        if (it == tf_[d].end()) {
            return 0.0;
        }
        const double tf = it->second;
        const double dl = len_[d];
        const double ln2 = std::log(2.0);
        double f = tf / dl;
        if (f > 1.0 - 1e-9) {
            f = 1.0 - 1e-9;
        }
        double information = tf * std::log(tf * avg_ * n_ / (dl * cf_.at(term))) / ln2;
        double correction = 0.5 * std::log(2.0 * 3.14159265358979323846 * tf * (1.0 - f)) / ln2;
        return std::pow(1.0 - f, 2.0) / (tf + 1.0) * (information + correction);
    }

    std::vector<double> scores(const std::string& query) const
    {
        std::vector<double> s(tf_.size(), 0.0);
        for (const auto& t : qidf::tokenize(query, mode_)) {
            if (!cf_.count(t)) {
                continue;
            }
            for (std::size_t d = 0; d < tf_.size(); ++d) {
                s[d] += weight(d, t);
            }
        }
        return s;
    }

private:
    qidf::TokenizerMode mode_;
    double n_ = 0.0;
    double avg_ = 0.0;
    std::vector<std::map<std::string, double>> tf_;
    std::vector<double> len_;
    std::map<std::string, double> cf_;
};

/// Descending score, ascending index on ties.
inline std::vector<std::size_t> rank_dense(const std::vector<double>& scores, std::size_t k)
{
    std::vector<std::size_t> idx(scores.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        idx[i] = i;
    }
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    idx.resize(std::min(k, idx.size()));
    return idx;
}

/// NDCG@10 with a single relevant document of gain 1.
inline double single_gold_ndcg(const std::vector<std::size_t>& ranking, std::size_t gold)
{
    for (std::size_t i = 0; i < std::min<std::size_t>(10, ranking.size()); ++i) {
        if (ranking[i] == gold) {
            return 1.0 / std::log2(static_cast<double>(i) + 2.0);
        }
    }
    return 0.0;
}

/// Kendall tau-b between two score vectors over the same items.
inline double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y)
{
    double concordant = 0.0;
    double discordant = 0.0;
    double ties_x = 0.0;
    double ties_y = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            double dx = x[i] - x[j];
            double dy = y[i] - y[j];
            if (dx == 0.0 && dy == 0.0) {
                continue;
            }
            if (dx == 0.0) {
                ties_x += 1.0;
            } else if (dy == 0.0) {
                ties_y += 1.0;
            } else if ((dx > 0) == (dy > 0)) {
                concordant += 1.0;
            } else {
                discordant += 1.0;
            }
        }
    }
    double denom = std::sqrt((concordant + discordant + ties_x) * (concordant + discordant + ties_y));
    return denom == 0.0 ? 1.0 : (concordant - discordant) / denom;
}

/// The hapax construction: N = 1000 documents in ten topic groups.
///   - 50 mid-frequency words (5 per group, df around 100): 12 distractor documents
///     per group repeat their group's five words three times each; 780 background
///     documents carry six random mid words once.
///   - 100 gold documents (10 per group) each hold one word that occurs nowhere else.
///   - Filler words ("fill0".."fill49") pad every document to 20 tokens.
/// Query i is its gold document's unique word plus the five words of its group;
/// the gold document is the only relevant one.
struct HapaxFixture {
    qidf::Corpus corpus;
    qidf::QuerySet queries;
    qidf::QrelSet qrels;
    std::vector<std::size_t> gold; // dense index of each query's gold document
};

inline HapaxFixture make_hapax_fixture(std::uint64_t seed = 7)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> filler(0, 49);
    std::uniform_int_distribution<int> mid(0, 49);
    auto mid_word = [](int g, int j) { return "mid" + std::to_string(g) + "x" + std::to_string(j); };
    auto pad = [&](std::string& text, int n) {
        for (int i = 0; i < n; ++i) {
            text += " fill" + std::to_string(filler(rng));
        }
    };

    struct Pending {
        std::string text;
        int query = -1;
    };
    std::vector<Pending> docs;
    for (int g = 0; g < 10; ++g) {
        for (int r = 0; r < 12; ++r) {
            std::string text;
            for (int j = 0; j < 5; ++j) {
                for (int rep = 0; rep < 3; ++rep) {
                    text += " " + mid_word(g, j);
                }
            }
            pad(text, 5);
            docs.push_back({text});
        }
    }
    for (int i = 0; i < 780; ++i) {
        std::string text;
        for (int j = 0; j < 6; ++j) {
            int m = mid(rng);
            text += " " + mid_word(m / 5, m % 5);
        }
        pad(text, 14);
        docs.push_back({text});
    }
    for (int i = 0; i < 100; ++i) {
        std::string text = "uniq" + std::to_string(i);
        pad(text, 19);
        docs.push_back({text, i});
    }
    std::shuffle(docs.begin(), docs.end(), rng);

    HapaxFixture f;
    f.gold.assign(100, 0);
    for (std::size_t d = 0; d < docs.size(); ++d) {
        std::string id = "d" + std::to_string(d);
        f.corpus.add({id, docs[d].text});
        if (docs[d].query >= 0) {
            f.gold[static_cast<std::size_t>(docs[d].query)] = d;
            f.qrels.judgments["q" + std::to_string(docs[d].query)][id] = 1;
        }
    }
    for (int i = 0; i < 100; ++i) {
        int g = i / 10;
        std::string text = "uniq" + std::to_string(i);
        for (int j = 0; j < 5; ++j) {
            text += " " + mid_word(g, j);
        }
        f.queries.push_back({"q" + std::to_string(i), text});
    }
    return f;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("qidf_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace qidf_test
