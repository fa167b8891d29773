// qidf: build, transform, query and evaluate sparse lexical indexes.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qidf/qidf.hpp"

namespace {

using qidf::SparseScoreIndex;
using json = nlohmann::json;

struct Options {
    std::string corpus;
    std::string queries;
    std::string qrels;
    std::string index;
    std::string out;
    std::string stopwords;
    std::string mode = "t0";
    std::string format = "tsv";
    std::optional<double> q;
    std::optional<double> gamma;
    bool dph = false;
    std::size_t k = 100;
    double k1 = 1.5;
    double b = 0.75;
    std::vector<double> grid = qidf::default_q_grid();
    std::vector<std::uint64_t> budgets = {2048, 4096, 8192, 16384};
    std::string bins = "1,2,3-5,6-20,21-50,51-200,201-1000,1001-5000,5001+";
    std::uint64_t seed = 0;
    std::uint64_t resamples = 10'000;
    std::size_t threads = 1;
    std::size_t trials = 5;
    std::size_t queries_per_trial = 1000;
};

qidf::StopwordSet stopwords_for(const Options& o)
{
    return o.stopwords.empty() ? qidf::default_stopwords() : qidf::load_stopwords(o.stopwords);
}

qidf::Corpus read_corpus_file(const std::string& path)
{
    bool tsv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".tsv") == 0;
    return qidf::load_corpus(path, tsv ? qidf::CorpusFormat::tsv : qidf::CorpusFormat::jsonl);
}

/// Writes to --out when given, stdout otherwise.
class Output {
public:
    explicit Output(const std::string& path)
    {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) {
                throw qidf::Error("cannot write '" + path + "'");
            }
        }
    }

    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

void echo_config(const CLI::App& sub)
{
    std::cerr << "# qidf " << sub.get_name();
    for (const auto* opt : sub.get_options()) {
        if (opt->get_lnames().empty() || opt->get_single_name() == "help") {
            continue;
        }
        if (opt->count() > 0) {
            std::cerr << " --" << opt->get_single_name();
            if (opt->get_type_size() != 0) {
                for (const auto& r : opt->results()) {
                    std::cerr << ' ' << r;
                }
            }
        } else if (!opt->get_default_str().empty()) {
            std::cerr << " --" << opt->get_single_name() << ' ' << opt->get_default_str();
        }
    }
    std::cerr << '\n';
}

void apply_transform(SparseScoreIndex& index, const Options& o)
{
    if (o.q) {
        if (qidf::rescale_index(index, *o.q).skipped) {
            std::cerr << "q = 1.0: skipped (bit-identity gate)\n";
        }
    } else if (o.gamma) {
        if (qidf::rescale_index_gamma(index, *o.gamma).skipped) {
            std::cerr << "gamma = 1.0: skipped (bit-identity gate)\n";
        }
    }
}

int cmd_build(const Options& o)
{
    auto corpus = read_corpus_file(o.corpus);
    auto mode = qidf::parse_tokenizer_mode(o.mode);
    auto stop = stopwords_for(o);
    SparseScoreIndex index = o.dph ? qidf::build_dph_index(corpus, mode, stop)
                                   : qidf::build_index(corpus, mode, qidf::BuildParams{o.k1, o.b}, stop);
    apply_transform(index, o);
    qidf::save_index(index, o.out);
    std::cout << "docs\t" << index.num_docs() << "\nterms\t" << index.num_terms() << "\nnnz\t" << index.nnz()
              << "\nbytes\t" << qidf::serialized_size(index) << '\n';
    return 0;
}

int cmd_rescale(const Options& o)
{
    auto index = qidf::load_index(o.index);
    apply_transform(index, o);
    qidf::save_index(index, o.out.empty() ? o.index : o.out);
    return 0;
}

int cmd_search(const Options& o)
{
    auto index = qidf::load_index(o.index);
    apply_transform(index, o);
    auto queries = qidf::load_queries(o.queries);
    auto lists = qidf::batch_retrieve(index, queries, index.header().mode, o.k, stopwords_for(o), {o.threads, nullptr});
    Output out(o.out);
    qidf::write_run(out.stream(), lists);
    return 0;
}

int cmd_sweep(const Options& o)
{
    auto queries = qidf::load_queries(o.queries);
    auto qrels = qidf::load_qrels(o.qrels);
    auto table = qidf::q_sweep(o.index, queries, qrels, o.grid, stopwords_for(o));
    Output out(o.out);
    if (o.format == "json") {
        json rows = json::array();
        for (const auto& r : table.rows) {
            rows.push_back({{"q", r.q}, {"mean_ndcg", r.mean_ndcg}});
        }
        out.stream() << json{{"rows", rows}, {"q_opt", table.q_opt}, {"best_ndcg", table.best_ndcg}}.dump(2) << '\n';
    } else {
        qidf::write_sweep_csv(out.stream(), table);
        std::cerr << "q_opt\t" << table.q_opt << '\n';
    }
    return 0;
}

int cmd_predict(const Options& o)
{
    auto corpus = read_corpus_file(o.corpus);
    auto stats = qidf::compute_corpus_stats(corpus, qidf::parse_tokenizer_mode(o.mode), stopwords_for(o));
    double q = qidf::predict_q(stats);
    Output out(o.out);
    if (o.format == "json") {
        out.stream() << json{{"n_tok", stats.n_tok},         {"vocab_size", stats.vocab_size},
                             {"htok", stats.htok},           {"ttr", stats.ttr},
                             {"median_df", stats.median_df}, {"frac_df_le5", stats.frac_df_le5},
                             {"q_pred", q}}
                            .dump(2)
                     << '\n';
        return 0;
    }
    auto& s = out.stream();
    s.precision(6);
    s << "n_tok\t" << stats.n_tok << "\nvocab_size\t" << stats.vocab_size << "\nhtok\t" << stats.htok << "\nttr\t"
      << stats.ttr << "\nmedian_df\t" << stats.median_df << "\nfrac_df_le5\t" << stats.frac_df_le5 << "\nq_pred\t" << q
      << '\n';
    return 0;
}

struct SystemEval {
    std::string name;
    std::vector<qidf::RankedList> lists;
    qidf::EvalReport ndcg;
    qidf::EvalReport mrr;
    qidf::EvalReport recall;
};

SystemEval eval_system(std::string name, const SparseScoreIndex& index, const qidf::QuerySet& queries,
                       const qidf::QrelSet& qrels, const Options& o)
{
    SystemEval e{std::move(name), {}, {}, {}, {}};
    e.lists = qidf::batch_retrieve(index, queries, index.header().mode, o.k, stopwords_for(o), {o.threads, nullptr});
    e.ndcg = qidf::evaluate(e.lists, qrels, qidf::Metric::ndcg, 10);
    e.mrr = qidf::evaluate(e.lists, qrels, qidf::Metric::mrr, o.k);
    e.recall = qidf::evaluate(e.lists, qrels, qidf::Metric::recall, o.k);
    return e;
}

int cmd_eval(const Options& o)
{
    auto baseline = qidf::load_index(o.index);
    auto queries = qidf::load_queries(o.queries);
    auto qrels = qidf::load_qrels(o.qrels);
    qidf::validate_qrels(qrels, queries);

    std::vector<SystemEval> systems;
    systems.push_back(eval_system("baseline", baseline, queries, qrels, o));
    if (o.q || o.gamma) {
        auto transformed = baseline;
        apply_transform(transformed, o);
        std::ostringstream label;
        label << (o.q ? "qlog q=" : "idf^gamma gamma=") << (o.q ? *o.q : *o.gamma);
        systems.push_back(eval_system(label.str(), transformed, queries, qrels, o));
    }
    std::optional<qidf::BootstrapResult> boot;
    if (systems.size() == 2) {
        boot = qidf::paired_bootstrap(systems[0].ndcg.per_query, systems[1].ndcg.per_query,
                                      {o.resamples, o.seed, o.threads});
    }
    std::optional<qidf::Corpus> corpus;
    if (!o.corpus.empty()) {
        corpus = read_corpus_file(o.corpus);
    }

    Output out(o.out);
    auto& s = out.stream();
    if (o.format == "json") {
        json doc;
        doc["queries_evaluated"] = systems[0].ndcg.n_queries;
        doc["queries_skipped"] = systems[0].ndcg.skipped;
        for (const auto& e : systems) {
            json sys{{"ndcg@10", e.ndcg.mean},
                     {"mrr@" + std::to_string(o.k), e.mrr.mean},
                     {"recall@" + std::to_string(o.k), e.recall.mean},
                     {"per_query_ndcg@10", e.ndcg.per_query}};
            if (corpus) {
                auto report = qidf::recall_at_token_budget(e.lists, qrels, o.budgets,
                                                           qidf::whitespace_token_counter(*corpus));
                for (const auto& row : report.rows) {
                    sys["recall@tokens"][std::to_string(row.budget)] = row.recall;
                }
            }
            doc["systems"][e.name] = sys;
        }
        if (boot) {
            doc["bootstrap"] = {{"mean_delta", boot->mean_delta}, {"ci_lo", boot->ci_lo},
                                {"ci_hi", boot->ci_hi},           {"sign_reversals", boot->sign_reversals},
                                {"resamples", boot->resamples},   {"seed", boot->seed},
                                {"p", qidf::format_p_value(*boot)}};
        }
        s << doc.dump(2) << '\n';
        return 0;
    }
    s.precision(4);
    s << std::fixed << "system\tndcg@10\tmrr@" << o.k << "\trecall@" << o.k << "\tqueries\n";
    for (const auto& e : systems) {
        s << e.name << '\t' << e.ndcg.mean << '\t' << e.mrr.mean << '\t' << e.recall.mean << '\t' << e.ndcg.n_queries
          << '\n';
    }
    if (corpus) {
        s << "\nsystem\tbudget\trecall@tokens\n";
        for (const auto& e : systems) {
            auto report = qidf::recall_at_token_budget(e.lists, qrels, o.budgets, qidf::whitespace_token_counter(*corpus));
            for (const auto& row : report.rows) {
                s << e.name << '\t' << row.budget << '\t' << row.recall << '\n';
            }
        }
    }
    if (boot) {
        s << "\ndelta_ndcg@10\t" << boot->mean_delta << "\nci95\t[" << boot->ci_lo << ", " << boot->ci_hi
          << "]\nsign_reversals\t" << boot->sign_reversals << " / " << boot->resamples << "\np\t"
          << qidf::format_p_value(*boot) << '\n';
    }
    return 0;
}

int cmd_occlusion(const Options& o)
{
    auto index = qidf::load_index(o.index);
    auto queries = qidf::load_queries(o.queries);
    auto qrels = qidf::load_qrels(o.qrels);
    auto bins = qidf::parse_df_bins(o.bins);
    auto report = qidf::df_bin_occlusion(index, queries, qrels, bins, o.q.value_or(1.0), stopwords_for(o));
    Output out(o.out);
    auto& s = out.stream();
    if (o.format == "json") {
        json rows = json::array();
        for (const auto& b : report.bins) {
            rows.push_back({{"bin", qidf::to_string(b.bin)}, {"loss", b.mean_loss}, {"affected", b.affected}});
        }
        s << json{{"q", report.q}, {"full_ndcg", report.full_ndcg}, {"queries", report.n_queries}, {"bins", rows}}.dump(2)
          << '\n';
        return 0;
    }
    s.precision(4);
    s << std::fixed << "# q=" << report.q << " full_ndcg@10=" << report.full_ndcg << " queries=" << report.n_queries
      << "\nbin\tloss\taffected\n";
    for (const auto& b : report.bins) {
        s << qidf::to_string(b.bin) << '\t' << b.mean_loss << '\t' << b.affected << '\n';
    }
    return 0;
}

int cmd_bench(const Options& o)
{
    auto index = qidf::load_index(o.index);
    auto queries = qidf::load_queries(o.queries);
    std::optional<qidf::Corpus> corpus;
    if (!o.corpus.empty()) {
        corpus = read_corpus_file(o.corpus);
    }
    qidf::BenchOptions bo;
    bo.trials = o.trials;
    bo.queries_per_trial = o.queries_per_trial;
    bo.top_k = o.k;
    bo.q = o.q.value_or(0.1);
    bo.seed = o.seed;
    auto report = qidf::run_bench(index, queries, bo, corpus ? &*corpus : nullptr, stopwords_for(o));
    Output out(o.out);
    qidf::write_bench_table(out.stream(), report);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sparse lexical retrieval with q-logarithmic IDF"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    Options o;

    const std::vector<std::string> modes = {"t0", "t1", "t2", "t3"};
    auto add_mode = [&](CLI::App* sub) {
        sub->add_option("--mode", o.mode, "Tokenizer mode")->check(CLI::IsMember(modes));
    };
    auto add_stopwords = [&](CLI::App* sub) {
        sub->add_option("--stopwords", o.stopwords, "Stopword file (one word per line)")->check(CLI::ExistingFile);
    };
    auto add_transform = [&](CLI::App* sub, bool with_dph) {
        auto* q = sub->add_option("--q", o.q, "Apply q-log IDF with this q");
        auto* g = sub->add_option("--gamma", o.gamma, "Apply idf^gamma");
        q->excludes(g);
        if (with_dph) {
            auto* d = sub->add_flag("--dph", o.dph, "Build a DPH index instead of BM25");
            d->excludes(q)->excludes(g);
        }
        return std::pair{q, g};
    };
    auto add_format = [&](CLI::App* sub, std::vector<std::string> allowed) {
        o.format = allowed.front();
        sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember(allowed));
    };

    auto* build = app.add_subcommand("build", "Build a BM25 (or DPH) index from a corpus");
    build->add_option("--corpus", o.corpus, "Corpus JSONL (doc_id, text) or .tsv")->required()->check(CLI::ExistingFile);
    add_mode(build);
    build->add_option("--k1", o.k1, "BM25 k1");
    build->add_option("--b", o.b, "BM25 b");
    add_transform(build, true);
    add_stopwords(build);
    build->add_option("--out", o.out, "Index file to write")->required();

    auto* rescale = app.add_subcommand("rescale", "Apply an IDF transform to a saved BM25 index");
    rescale->add_option("--index", o.index, "Index file")->required()->check(CLI::ExistingFile);
    auto [rq, rg] = add_transform(rescale, false);
    rescale->add_option("--out", o.out, "Destination (defaults to rewriting --index)");
    rescale->callback([&, rq = rq, rg = rg] {
        if (rq->count() + rg->count() == 0) {
            throw CLI::RequiredError("--q or --gamma");
        }
    });

    auto* search = app.add_subcommand("search", "Rank documents for a query file and write a run");
    search->add_option("--index", o.index, "Index file")->required()->check(CLI::ExistingFile);
    search->add_option("--queries", o.queries, "Queries JSONL (query_id, text)")->required()->check(CLI::ExistingFile);
    search->add_option("--k", o.k, "Hits per query")->check(CLI::PositiveNumber);
    add_transform(search, false);
    add_stopwords(search);
    search->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
    search->add_option("--out", o.out, "Run file (stdout when omitted)");

    auto* sweep = app.add_subcommand("sweep", "Mean NDCG@10 over a q grid, reloading the baseline per point");
    sweep->add_option("--index", o.index, "BM25 index file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--queries", o.queries, "Queries JSONL")->required()->check(CLI::ExistingFile);
    sweep->add_option("--qrels", o.qrels, "Qrels TSV")->required()->check(CLI::ExistingFile);
    sweep->add_option("--grid", o.grid, "q values")->delimiter(',');
    add_stopwords(sweep);
    add_format(sweep, {"csv", "json"});
    sweep->add_option("--out", o.out, "Output file");

    auto* predict = app.add_subcommand("predict-q", "Predict q from label-free corpus statistics");
    predict->add_option("--corpus", o.corpus, "Corpus JSONL or .tsv")->required()->check(CLI::ExistingFile);
    add_mode(predict);
    add_stopwords(predict);
    add_format(predict, {"tsv", "json"});
    predict->add_option("--out", o.out, "Output file");

    auto* eval = app.add_subcommand("eval", "NDCG@10, MRR and Recall, optionally against a transformed index");
    eval->add_option("--index", o.index, "BM25 index file")->required()->check(CLI::ExistingFile);
    eval->add_option("--queries", o.queries, "Queries JSONL")->required()->check(CLI::ExistingFile);
    eval->add_option("--qrels", o.qrels, "Qrels TSV")->required()->check(CLI::ExistingFile);
    eval->add_option("--k", o.k, "Retrieval depth and MRR/Recall cutoff")->check(CLI::PositiveNumber);
    add_transform(eval, false);
    eval->add_option("--resamples", o.resamples, "Bootstrap resamples")->check(CLI::PositiveNumber);
    eval->add_option("--seed", o.seed, "Bootstrap seed");
    eval->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
    auto* budgets = eval->add_option("--budgets", o.budgets, "Token budgets for Recall@K-tokens")->delimiter(',');
    eval->add_option("--corpus", o.corpus, "Corpus used to count document tokens")->check(CLI::ExistingFile);
    budgets->needs("--corpus");
    add_stopwords(eval);
    add_format(eval, {"tsv", "json"});
    eval->add_option("--out", o.out, "Output file");

    auto* occl = app.add_subcommand("occlusion", "Per-df-bin NDCG@10 loss from removing query tokens");
    occl->add_option("--index", o.index, "BM25 index file")->required()->check(CLI::ExistingFile);
    occl->add_option("--queries", o.queries, "Queries JSONL")->required()->check(CLI::ExistingFile);
    occl->add_option("--qrels", o.qrels, "Qrels TSV")->required()->check(CLI::ExistingFile);
    occl->add_option("--bins", o.bins, "df bins, e.g. 1,2,3-5,6-20,5001+");
    occl->add_option("--q", o.q, "q applied before occlusion");
    add_stopwords(occl);
    add_format(occl, {"tsv", "json"});
    occl->add_option("--out", o.out, "Output file");

    auto* bench = app.add_subcommand("bench", "Systems table: build, rescale, query latency, memory");
    bench->add_option("--index", o.index, "BM25 index file")->required()->check(CLI::ExistingFile);
    bench->add_option("--queries", o.queries, "Queries JSONL")->required()->check(CLI::ExistingFile);
    bench->add_option("--corpus", o.corpus, "Corpus, to time the index build")->check(CLI::ExistingFile);
    bench->add_option("--q", o.q, "q whose rescale and queries are timed (default 0.1)");
    bench->add_option("--trials", o.trials, "Timed trials")->check(CLI::PositiveNumber);
    bench->add_option("--queries-per-trial", o.queries_per_trial, "Queries per trial")->check(CLI::PositiveNumber);
    bench->add_option("--top-k,--k", o.k, "Hits per query")->check(CLI::PositiveNumber);
    bench->add_option("--seed", o.seed, "Query order seed");
    add_stopwords(bench);
    bench->add_option("--out", o.out, "Output file");

    CLI11_PARSE(app, argc, argv);

    const std::map<CLI::App*, int (*)(const Options&)> dispatch = {
        {build, cmd_build}, {rescale, cmd_rescale}, {search, cmd_search},       {sweep, cmd_sweep},
        {predict, cmd_predict}, {eval, cmd_eval},  {occl, cmd_occlusion}, {bench, cmd_bench},
    };
    for (const auto& [sub, fn] : dispatch) {
        if (sub->parsed()) {
            echo_config(*sub);
            try {
                return fn(o);
            } catch (const qidf::Error& e) {
                std::cerr << "error: " << e.what() << '\n';
                return 1;
            } catch (const nlohmann::json::exception& e) {
                std::cerr << "error: " << e.what() << '\n';
                return 1;
            }
        }
    }
    return 2;
}
