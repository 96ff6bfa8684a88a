// Command-line front end: ingest, index, build-graph, search, grit, eval,
// sweep and gen-queries.
//
// Exit codes: 0 success, 1 data error, 2 usage or configuration error.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "grit/grit.hpp"
#include "grit/http_backend.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int exit_data_error = 1;
constexpr int exit_usage_error = 2;

std::vector<std::pair<std::string, std::string>> parse_where(std::vector<std::string> const& items)
{
    std::vector<std::pair<std::string, std::string>> out;
    for (auto const& item : items) {
        auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw grit::ConfigError("--where expects column=value, got '" + item + "'");
        }
        out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
    return out;
}

std::optional<grit::Split> parse_optional_split(std::string const& s)
{
    if (s.empty()) {
        return std::nullopt;
    }
    try {
        return grit::parse_split(s);
    } catch (std::invalid_argument const& e) {
        throw grit::ConfigError(e.what());
    }
}

std::optional<std::string> non_empty(std::string const& s)
{
    return s.empty() ? std::nullopt : std::optional<std::string>(s);
}

fs::path sidecar_for(fs::path const& output)
{
    auto p = output;
    p += ".config.toml";
    return p;
}

grit::JudgmentSet load_qrels(std::string const& path, std::string const& split, std::string const& locale,
                             std::vector<std::string> const& where)
{
    grit::JudgmentFilter filter;
    filter.split = parse_optional_split(split);
    filter.locale = non_empty(locale);
    filter.where = parse_where(where);
    return grit::parse_judgments(fs::path(path), filter);
}

std::string run_name(fs::path const& path, std::string const& tag)
{
    return tag.empty() ? path.stem().string() : tag;
}

// ---------------------------------------------------------------------------

struct IngestArgs {
    std::string catalog;
    std::string catalog_format = "auto";
    std::string judgments;
    std::string split;
    std::string locale;
    std::vector<std::string> where;
    std::string out_dir;
};

int run_ingest(IngestArgs const& a)
{
    if (a.catalog.empty() && a.judgments.empty()) {
        throw grit::ConfigError("ingest needs --catalog and/or --judgments");
    }
    fs::path out(a.out_dir);
    if (!a.catalog.empty()) {
        grit::CatalogFormat format = grit::catalog_format_for(a.catalog);
        if (a.catalog_format == "tsv") {
            format = grit::CatalogFormat::tsv;
        } else if (a.catalog_format == "jsonl") {
            format = grit::CatalogFormat::jsonl;
        }
        auto catalog = grit::parse_products(fs::path(a.catalog), format);
        if (auto locale = non_empty(a.locale)) {
            std::erase_if(catalog, [&](auto const& kv) { return !kv.second.locale.empty() && kv.second.locale != *locale; });
        }
        grit::write_products_tsv(catalog, out / "catalog.tsv");
        std::cerr << "catalog: " << catalog.size() << " products\n";
    }
    if (!a.judgments.empty()) {
        auto set = load_qrels(a.judgments, a.split, a.locale, a.where);
        grit::write_judgments(set, out / "judgments.tsv");
        std::vector<grit::Query> all;
        for (auto const& [id, q] : set.queries) {
            all.push_back(q);
        }
        grit::write_queries(all, out / "queries.tsv");
        for (auto split : {grit::Split::train, grit::Split::test}) {
            auto part = set.only(split);
            if (part.empty()) {
                continue;
            }
            std::vector<grit::Query> qs;
            for (auto const& [id, q] : part.queries) {
                qs.push_back(q);
            }
            grit::write_queries(qs, out / ("queries_" + std::string(grit::to_string(split)) + ".tsv"));
        }
        std::cerr << "judgments: " << set.size() << " rows, " << set.queries.size() << " queries\n";
    }
    return 0;
}

struct IndexArgs {
    std::string catalog;
    std::string fields = "title,description,brand,color";
    std::string out;
};

int run_index(IndexArgs const& a)
{
    auto catalog = grit::parse_products(fs::path(a.catalog));
    auto index = grit::build_index(catalog, grit::IndexFields::parse(a.fields));
    index.save(fs::path(a.out));
    std::cerr << "index: " << index.doc_count() << " documents, " << index.term_count() << " terms\n";
    return 0;
}

struct GraphArgs {
    std::string judgments;
    std::string weights;
    std::string locale;
    std::vector<std::string> where;
    unsigned min_weight = 1;
    std::string out;
};

int run_build_graph(GraphArgs const& a)
{
    grit::WeightMatrix wm;
    if (!a.weights.empty()) {
        wm = grit::WeightMatrix::load(a.weights);
    }
    if (a.min_weight == 0) {
        throw grit::ConfigError("--min-weight must be at least 1");
    }
    auto train = load_qrels(a.judgments, "train", a.locale, a.where);
    if (train.empty()) {
        std::cerr << "warning: no train-split judgments; writing an empty graph\n";
    }
    auto graph = grit::build_graph(train, wm, a.min_weight);
    grit::save_graph(graph, fs::path(a.out));
    auto stats = grit::graph_stats(graph);
    std::cerr << "graph: " << stats.node_count << " nodes, " << stats.edge_count << " edges, max degree "
              << stats.max_degree << "\nweights:";
    for (auto const& [w, count] : stats.weight_histogram) {
        std::cerr << ' ' << w << ':' << count;
    }
    std::cerr << '\n';
    return 0;
}

struct SearchArgs {
    std::string index;
    std::string catalog;
    std::string fields = "title,description,brand,color";
    std::string queries;
    std::size_t depth = 2000;
    double k1 = 1.2;
    double b = 0.75;
    std::string tag = "bm25";
    std::size_t threads = 0;
    std::string out;
};

int run_search(SearchArgs const& a)
{
    if (a.index.empty() == a.catalog.empty()) {
        throw grit::ConfigError("search needs exactly one of --index or --catalog");
    }
    if (a.depth == 0) {
        throw grit::ConfigError("--depth must be positive");
    }
    auto index = a.index.empty()
        ? grit::build_index(grit::parse_products(fs::path(a.catalog)), grit::IndexFields::parse(a.fields))
        : grit::InvertedIndex::load(fs::path(a.index));
    auto queries = grit::read_queries(fs::path(a.queries));
    auto runs = grit::bm25_batch(index, queries, a.depth, grit::Bm25Params{a.k1, a.b}, a.threads);
    grit::write_run_file(runs, a.tag, fs::path(a.out));
    std::cerr << "search: " << queries.size() << " queries\n";
    return 0;
}

struct GritArgs {
    std::string run;
    std::string graph;
    double t = 0.02;
    double b = 0.3;
    std::string sum_over = "seeds";
    std::string tag;
    std::size_t threads = 0;
    std::string out;
};

int run_grit(GritArgs const& a)
{
    grit::GritParams params{a.t, a.b, grit::parse_neighbor_weighting(a.sum_over)};
    params.validate();
    std::string tag;
    auto runs = grit::read_run_file(fs::path(a.run), &tag);
    auto graph = grit::load_graph(fs::path(a.graph));
    auto out = grit::grit_batch(runs, graph, params, a.threads);
    bool keep_tag = a.tag.empty() || a.tag == tag;
    if (keep_tag && out == runs && !runs.empty()) {
        // Nothing moved: pass the input through verbatim.
        fs::path dst(a.out);
        if (dst.has_parent_path()) {
            fs::create_directories(dst.parent_path());
        }
        if (!fs::exists(dst) || !fs::equivalent(fs::path(a.run), dst)) {
            fs::copy_file(fs::path(a.run), dst, fs::copy_options::overwrite_existing);
        }
        return 0;
    }
    if (!a.tag.empty()) {
        tag = a.tag;
    } else if (tag.empty()) {
        tag = "grit";
    }
    grit::write_run_file(out, tag, fs::path(a.out));
    return 0;
}

struct EvalArgs {
    std::vector<std::string> runs;
    std::vector<std::string> names;
    std::string qrels;
    std::string split;
    std::string locale;
    std::vector<std::string> where;
    std::vector<std::size_t> k{500, 1000, 1500, 2000};
    std::string relevant = "E";
    std::string zero_relevant = "exclude";
    std::string out;
    std::string markdown;
    std::string per_query_dir;
};

grit::ZeroRelevantPolicy parse_zero_policy(std::string const& s)
{
    if (s == "exclude") {
        return grit::ZeroRelevantPolicy::exclude;
    }
    if (s == "zero") {
        return grit::ZeroRelevantPolicy::as_zero;
    }
    throw grit::ConfigError("--zero-relevant expects exclude or zero");
}

int run_eval(EvalArgs const& a)
{
    if (!a.names.empty() && a.names.size() != a.runs.size()) {
        throw grit::ConfigError("--name must be given once per --run");
    }
    auto relevant = grit::RelevantSet::parse(a.relevant);
    auto policy = parse_zero_policy(a.zero_relevant);
    auto qrels = grit::to_qrels(load_qrels(a.qrels, a.split, a.locale, a.where));

    std::vector<std::string> names;
    std::vector<grit::RunMap> runs;
    for (std::size_t i = 0; i < a.runs.size(); ++i) {
        std::string tag;
        runs.push_back(grit::read_run_file(fs::path(a.runs[i]), &tag));
        auto name = a.names.empty() ? run_name(a.runs[i], tag) : a.names[i];
        if (std::find(names.begin(), names.end(), name) != names.end()) {
            name = fs::path(a.runs[i]).stem().string() + "#" + std::to_string(i + 1);
        }
        names.push_back(name);
    }

    std::vector<grit::ReportRow> rows;
    for (auto k : a.k) {
        if (k == 0) {
            throw grit::ConfigError("recall cutoffs must be positive");
        }
        std::optional<grit::EvalReport> reference;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            auto report = grit::evaluate(runs[i], qrels, k, relevant, policy);
            grit::ReportRow row;
            row.method = names[i];
            row.k = k;
            row.recall = report.mean;
            if (i == 0) {
                row.baseline = true;
                row.improvement_pct = 0.0;
                reference = report;
            } else {
                if (report.mean && reference->mean) {
                    row.improvement_pct = grit::improvement_percent(*reference->mean, *report.mean);
                }
                row.p_value = grit::detail::p_value_against(*reference, report);
            }
            rows.push_back(row);
            if (!a.per_query_dir.empty()) {
                grit::write_per_query(report, fs::path(a.per_query_dir) / (names[i] + "_R@" + std::to_string(k) + ".tsv"));
            }
            if (report.empty()) {
                std::cerr << "warning: " << names[i] << " R@" << k << ": no query has a relevant product\n";
            }
        }
    }

    if (!a.out.empty()) {
        auto out = grit::detail::open_output(fs::path(a.out));
        grit::write_csv(rows, out);
        grit::detail::finish_output(out, fs::path(a.out));
    } else {
        grit::write_csv(rows, std::cout);
    }
    if (!a.markdown.empty()) {
        auto out = grit::detail::open_output(fs::path(a.markdown));
        grit::write_comparison_markdown(rows, out);
        grit::detail::finish_output(out, fs::path(a.markdown));
    }
    return 0;
}

struct SweepArgs {
    std::string run;
    std::string graph;
    std::string qrels;
    std::string split;
    std::string locale;
    std::vector<std::string> where;
    std::vector<double> t{0.000, 0.005, 0.010, 0.015, 0.020, 0.025, 0.030, 0.035, 0.040};
    std::vector<double> b{0.1, 0.2, 0.3, 0.4};
    std::vector<std::size_t> k{500, 1000, 1500, 2000};
    std::string relevant = "E";
    std::string zero_relevant = "exclude";
    std::string sum_over = "seeds";
    bool per_depth = true;
    std::string method;
    double table_t = 0.02;
    std::vector<double> table_b{0.1, 0.2, 0.3};
    std::size_t figure_k = 1000;
    std::size_t threads = 0;
    std::string out;
    std::string markdown;
};

int run_sweep(SweepArgs const& a)
{
    grit::SweepGrid grid{a.t, a.b, a.k};
    grid.validate();
    grit::SweepOptions options;
    options.relevant = grit::RelevantSet::parse(a.relevant);
    options.zero_relevant = parse_zero_policy(a.zero_relevant);
    options.weighting = grit::parse_neighbor_weighting(a.sum_over);
    options.per_depth = a.per_depth;
    options.threads = a.threads;

    std::string tag;
    auto runs = grit::read_run_file(fs::path(a.run), &tag);
    options.method = a.method.empty() ? run_name(a.run, tag) : a.method;
    auto graph = grit::load_graph(fs::path(a.graph));
    auto qrels = grit::to_qrels(load_qrels(a.qrels, a.split, a.locale, a.where));

    auto table = grit::sweep(runs, graph, grid, qrels, options);
    grit::emit_report(table, grit::ReportFormat::csv, fs::path(a.out));
    if (!a.markdown.empty()) {
        grit::MarkdownOptions md{a.table_t, a.table_b, a.figure_k};
        grit::emit_report(table, grit::ReportFormat::markdown, fs::path(a.markdown), md);
    }
    return 0;
}

struct GenArgs {
    std::string queries;
    std::string backend = "mock";
    std::string backend_config;
    std::string prompts;
    std::string mock_template = "Find {query} for purchase";
    std::string mock_verdict = "yes";
    std::size_t max_retries = 5;
    bool resume = false;
    std::string out;
    std::string review_sheet;
    std::size_t review_size = 100;
};

int run_gen_queries(GenArgs const& a)
{
    grit::BenchmarkOptions options;
    options.max_retries = a.max_retries;
    options.resume = a.resume;
    if (!a.prompts.empty()) {
        options.prompts = grit::PromptTemplates::load(a.prompts);
    }
    if (a.max_retries == 0) {
        throw grit::ConfigError("--max-retries must be at least 1");
    }

    std::unique_ptr<grit::TextGenBackend> backend;
    if (a.backend == "mock") {
        backend = std::make_unique<grit::MockBackend>(
            options.prompts, grit::MockBackend::Options{a.mock_template, a.mock_verdict, {}});
    } else if (a.backend == "http") {
        if (a.backend_config.empty()) {
            throw grit::ConfigError("--backend http needs --backend-config");
        }
        backend = std::make_unique<grit::HttpChatBackend>(grit::HttpBackendConfig::load(a.backend_config));
    } else {
        throw grit::ConfigError("--backend expects mock or http");
    }

    auto queries = grit::read_queries(fs::path(a.queries));
    auto records = grit::generate_benchmark(queries, *backend, fs::path(a.out), options);
    std::size_t validated = 0;
    for (auto const& r : records) {
        validated += r.validated ? 1 : 0;
    }
    std::cerr << "gen-queries: " << records.size() << " queries, " << validated << " validated\n";
    if (!a.review_sheet.empty()) {
        grit::write_review_sheet(records, a.review_size, fs::path(a.review_sheet));
    }
    return 0;
}

std::string toml_value(std::string const& v)
{
    if (v == "true" || v == "false") {
        return v;
    }
    double d = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
    if (ec == std::errc() && ptr == v.data() + v.size()) {
        return v;
    }
    std::string out = "\"";
    for (char c : v) {
        if (c == '"' || c == '\\') {
            out.push_back('\\');
        }
        out.push_back(c);
    }
    return out + '"';
}

// Effective values of the active subcommand, in a form `--config` reads back.
// Unset options without a default are left out.
void write_sidecar(CLI::App const& app, fs::path const& output)
{
    if (output.empty()) {
        return;
    }
    std::ofstream out(sidecar_for(output), std::ios::binary | std::ios::trunc);
    for (auto const* sub : app.get_subcommands()) {
        out << '[' << sub->get_name() << "]\n";
        for (auto const* opt : sub->get_options()) {
            if (opt->get_lnames().empty() || opt->get_lnames().front() == "help") {
                continue;
            }
            std::vector<std::string> values;
            if (opt->get_expected_min() == 0) {
                bool on = opt->count() > 0 ? opt->as<bool>() : CLI::detail::to_flag_value(opt->get_default_str()) > 0;
                values.emplace_back(on ? "true" : "false");
            } else if (opt->count() > 0) {
                values = opt->results();
            } else {
                auto d = opt->get_default_str();
                if (d.size() >= 2 && d.front() == '[' && d.back() == ']') {
                    for (auto const& part : grit::detail::split(std::string_view(d).substr(1, d.size() - 2), ',')) {
                        values.emplace_back(part);
                    }
                } else if (!d.empty()) {
                    values.push_back(d);
                }
            }
            if (values.empty()) {
                continue;
            }
            out << opt->get_lnames().front() << '=';
            if (opt->get_items_expected_max() > 1) {
                out << '[';
                for (std::size_t i = 0; i < values.size(); ++i) {
                    out << (i ? ", " : "") << toml_value(values[i]);
                }
                out << ']';
            } else {
                out << toml_value(values.back());
            }
            out << '\n';
        }
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Product-graph retrieval toolkit: BM25, graph-based candidate replacement, recall evaluation."};
    app.require_subcommand(1);
    // Lets `--config` follow the subcommand name as well.
    app.fallthrough();
    app.set_config("--config", "", "TOML config file; command-line flags override its values");

    auto existing = CLI::ExistingFile;

    IngestArgs ingest;
    auto* ingest_cmd = app.add_subcommand("ingest", "Validate and normalize a catalog and/or judgments");
    ingest_cmd->add_option("--catalog", ingest.catalog, "Catalog TSV or JSONL")->check(existing);
    ingest_cmd->add_option("--catalog-format", ingest.catalog_format, "tsv, jsonl or auto")
        ->check(CLI::IsMember({"auto", "tsv", "jsonl"}))
        ->capture_default_str();
    ingest_cmd->add_option("--judgments", ingest.judgments, "Judgments TSV")->check(existing);
    ingest_cmd->add_option("--split", ingest.split, "Keep only this split (train|test)");
    ingest_cmd->add_option("--locale", ingest.locale, "Keep only this product locale");
    ingest_cmd->add_option("--where", ingest.where, "Extra column=value filter on judgments");
    ingest_cmd->add_option("--out-dir", ingest.out_dir, "Output directory")->required();

    IndexArgs index;
    auto* index_cmd = app.add_subcommand("index", "Build and save a BM25 inverted index");
    index_cmd->add_option("--catalog", index.catalog, "Catalog TSV or JSONL")->required()->check(existing);
    index_cmd->add_option("--fields", index.fields, "Indexed fields")->capture_default_str();
    index_cmd->add_option("--out", index.out, "Index file")->required();

    GraphArgs graph;
    auto* graph_cmd = app.add_subcommand("build-graph", "Build the product similarity graph from train judgments");
    graph_cmd->add_option("--judgments", graph.judgments, "Judgments TSV")->required()->check(existing);
    graph_cmd->add_option("--weights", graph.weights, "Weight-matrix override file")->check(existing);
    graph_cmd->add_option("--locale", graph.locale, "Keep only this product locale");
    graph_cmd->add_option("--where", graph.where, "Extra column=value filter");
    graph_cmd->add_option("--min-weight", graph.min_weight, "Drop edges lighter than this")->capture_default_str();
    graph_cmd->add_option("--out", graph.out, "Graph TSV")->required();

    SearchArgs search;
    auto* search_cmd = app.add_subcommand("search", "BM25 retrieval for a query file");
    search_cmd->add_option("--index", search.index, "Saved index")->check(existing);
    search_cmd->add_option("--catalog", search.catalog, "Catalog to index on the fly")->check(existing);
    search_cmd->add_option("--fields", search.fields, "Indexed fields with --catalog")->capture_default_str();
    search_cmd->add_option("--queries", search.queries, "Query TSV")->required()->check(existing);
    search_cmd->add_option("-n,--depth", search.depth, "Results per query")->capture_default_str();
    search_cmd->add_option("--k1", search.k1, "BM25 k1")->capture_default_str();
    search_cmd->add_option("--bm25-b", search.b, "BM25 length normalization b")->capture_default_str();
    search_cmd->add_option("--tag", search.tag, "Run tag")->capture_default_str();
    search_cmd->add_option("--threads", search.threads, "Worker threads (0 = all cores)")->capture_default_str();
    search_cmd->add_option("--out", search.out, "Run file")->required();

    GritArgs grit_args;
    auto* grit_cmd = app.add_subcommand("grit", "Replace the tail of each result list with graph neighbors of its head");
    grit_cmd->add_option("--run", grit_args.run, "Initial run file")->required()->check(existing);
    grit_cmd->add_option("--graph", grit_args.graph, "Graph TSV")->required()->check(existing);
    grit_cmd->add_option("--t", grit_args.t, "Seed fraction")->capture_default_str();
    grit_cmd->add_option("--b", grit_args.b, "Replaced tail fraction")->capture_default_str();
    grit_cmd->add_option("--sum-over", grit_args.sum_over, "Sum neighbor weights over seeds or the full list")
        ->check(CLI::IsMember({"seeds", "full"}))
        ->capture_default_str();
    grit_cmd->add_option("--tag", grit_args.tag, "Run tag (default: input tag)");
    grit_cmd->add_option("--threads", grit_args.threads, "Worker threads (0 = all cores)")->capture_default_str();
    grit_cmd->add_option("--out", grit_args.out, "Output run file")->required();

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "Recall@k of one or more runs with paired t-tests against the first");
    eval_cmd->add_option("--run", eval.runs, "Run file (repeatable; the first is the reference)")
        ->required()
        ->check(existing);
    eval_cmd->add_option("--name", eval.names, "Display name per run");
    eval_cmd->add_option("--qrels", eval.qrels, "Judgments TSV")->required()->check(existing);
    eval_cmd->add_option("--split", eval.split, "Use only this split of the judgments");
    eval_cmd->add_option("--locale", eval.locale, "Keep only this product locale");
    eval_cmd->add_option("--where", eval.where, "Extra column=value filter");
    eval_cmd->add_option("--k", eval.k, "Recall cutoffs")->delimiter(',')->capture_default_str();
    eval_cmd->add_option("--relevant", eval.relevant, "Labels counted as relevant, e.g. E or E,S")
        ->capture_default_str();
    eval_cmd->add_option("--zero-relevant", eval.zero_relevant, "exclude or zero")->capture_default_str();
    eval_cmd->add_option("--out", eval.out, "CSV report (default: stdout)");
    eval_cmd->add_option("--markdown", eval.markdown, "Markdown report");
    eval_cmd->add_option("--per-query-dir", eval.per_query_dir, "Directory for per-query recall TSVs");

    SweepArgs sw;
    auto* sweep_cmd = app.add_subcommand("sweep", "Grid over t, b and k against the unmodified run");
    sweep_cmd->add_option("--run", sw.run, "Initial run file (deepest cutoff)")->required()->check(existing);
    sweep_cmd->add_option("--graph", sw.graph, "Graph TSV")->required()->check(existing);
    sweep_cmd->add_option("--qrels", sw.qrels, "Judgments TSV")->required()->check(existing);
    sweep_cmd->add_option("--split", sw.split, "Use only this split of the judgments");
    sweep_cmd->add_option("--locale", sw.locale, "Keep only this product locale");
    sweep_cmd->add_option("--where", sw.where, "Extra column=value filter");
    sweep_cmd->add_option("--t", sw.t, "Seed fractions")->delimiter(',')->capture_default_str();
    sweep_cmd->add_option("--b", sw.b, "Replaced tail fractions")->delimiter(',')->capture_default_str();
    sweep_cmd->add_option("--k", sw.k, "Recall cutoffs")->delimiter(',')->capture_default_str();
    sweep_cmd->add_option("--relevant", sw.relevant, "Labels counted as relevant")->capture_default_str();
    sweep_cmd->add_option("--zero-relevant", sw.zero_relevant, "exclude or zero")->capture_default_str();
    sweep_cmd->add_option("--sum-over", sw.sum_over, "seeds or full")
        ->check(CLI::IsMember({"seeds", "full"}))
        ->capture_default_str();
    sweep_cmd->add_flag("--per-depth,!--no-per-depth", sw.per_depth, "Rerank the depth-k prefix for each k")
        ->default_str(sw.per_depth ? "true" : "false");
    sweep_cmd->add_option("--method", sw.method, "Method label (default: run tag)");
    sweep_cmd->add_option("--table-t", sw.table_t, "t of the per-b markdown table")->capture_default_str();
    sweep_cmd->add_option("--table-b", sw.table_b, "b rows of the per-b markdown table")
        ->delimiter(',')
        ->capture_default_str();
    sweep_cmd->add_option("--figure-k", sw.figure_k, "Cutoff of the recall-versus-t table")->capture_default_str();
    sweep_cmd->add_option("--threads", sw.threads, "Worker threads (0 = all cores)")->capture_default_str();
    sweep_cmd->add_option("--out", sw.out, "CSV report")->required();
    sweep_cmd->add_option("--markdown", sw.markdown, "Markdown report");

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-queries", "Rewrite queries as task-oriented queries with validation");
    gen_cmd->add_option("--queries", gen.queries, "Query TSV")->required()->check(existing);
    gen_cmd->add_option("--backend", gen.backend, "mock or http")
        ->check(CLI::IsMember({"mock", "http"}))
        ->capture_default_str();
    gen_cmd->add_option("--backend-config", gen.backend_config, "JSON config of the http backend")->check(existing);
    gen_cmd->add_option("--prompts", gen.prompts, "JSON prompt templates")->check(existing);
    gen_cmd->add_option("--mock-template", gen.mock_template, "Mock generation template")->capture_default_str();
    gen_cmd->add_option("--mock-verdict", gen.mock_verdict, "Mock validation answer")->capture_default_str();
    gen_cmd->add_option("--max-retries", gen.max_retries, "Attempts per query")->capture_default_str();
    gen_cmd->add_flag("--resume", gen.resume, "Continue from the checkpoint of an interrupted run");
    gen_cmd->add_option("--out", gen.out, "Output TSV")->required();
    gen_cmd->add_option("--review-sheet", gen.review_sheet, "Also write a manual review sample");
    gen_cmd->add_option("--review-size", gen.review_size, "Rows in the review sample")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : exit_usage_error;
    }

    try {
        auto finish = [&](int rc, fs::path const& output) {
            write_sidecar(app, output);
            return rc;
        };
        if (*ingest_cmd) {
            return finish(run_ingest(ingest), fs::path(ingest.out_dir) / "ingest");
        }
        if (*index_cmd) {
            return finish(run_index(index), index.out);
        }
        if (*graph_cmd) {
            return finish(run_build_graph(graph), graph.out);
        }
        if (*search_cmd) {
            return finish(run_search(search), search.out);
        }
        if (*grit_cmd) {
            return finish(run_grit(grit_args), grit_args.out);
        }
        if (*eval_cmd) {
            return finish(run_eval(eval), eval.out);
        }
        if (*sweep_cmd) {
            return finish(run_sweep(sw), sw.out);
        }
        if (*gen_cmd) {
            return finish(run_gen_queries(gen), gen.out);
        }
    } catch (grit::ConfigError const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage_error;
    } catch (grit::BackendError const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_data_error;
    } catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_data_error;
    }
    return exit_usage_error;
}
