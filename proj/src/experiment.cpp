#include "radolearn/experiment.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "radolearn/common.hpp"
#include "radolearn/eval.hpp"
#include "radolearn/learner.hpp"
#include "radolearn/protocol.hpp"

namespace rado {

namespace fs = std::filesystem;
using nlohmann::json;

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    json j;
    in >> j;

    ExperimentConfig c;
    c.domain = j.at("domain").get<std::string>();
    c.dataset_path = j.at("dataset").get<std::string>();
    c.label_column = j.at("label_column").get<std::string>();
    c.positive_label = j.at("positive_label").get<std::string>();
    c.peers = j.at("peers").get<std::vector<int>>();
    c.dim_j = j.at("dim_j").get<std::vector<int>>();
    c.bins = j.at("bins").get<std::vector<int>>();
    c.share_proportion = j.at("share_proportion").get<std::vector<double>>();
    if (j.contains("gamma_grid")) c.gamma_grid = j["gamma_grid"].get<std::vector<double>>();
    if (j.contains("folds")) c.folds = j["folds"].get<int>();
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("shared_candidates"))
        c.shared_candidates = j["shared_candidates"].get<std::vector<std::string>>();

    // dataset path is relative to the config file
    const fs::path base = fs::path(path).parent_path();
    if (!fs::path(c.dataset_path).is_absolute()) {
        c.dataset_path = (base / c.dataset_path).string();
    }
    c.validate();
    return c;
}

void ExperimentConfig::validate() const {
    if (domain.empty()) throw std::invalid_argument("config: domain missing");
    if (peers.empty() || dim_j.empty() || bins.empty() || share_proportion.empty())
        throw std::invalid_argument("config: empty grid axis");
    if (seeds.empty()) throw std::invalid_argument("config: no seeds");
    if (folds < 2) throw std::invalid_argument("config: folds must be >= 2");
    if (gamma_grid.empty()) throw std::invalid_argument("config: empty gamma grid");
    for (int p : peers)
        if (p < 2) throw std::invalid_argument("config: peer counts must be >= 2");
    for (int k : dim_j)
        if (k < 1) throw std::invalid_argument("config: dim_j values must be >= 1");
    for (int b : bins)
        if (b < 2) throw std::invalid_argument("config: bin counts must be >= 2");
    for (double s : share_proportion)
        if (s < 0.0 || s > 1.0)
            throw std::invalid_argument("config: share proportions must lie in [0,1]");
}

std::vector<CellTask> plan_cells(const ExperimentConfig& config) {
    std::vector<CellTask> tasks;
    for (int b : config.bins)
        for (double p_s : config.share_proportion)
            for (int p : config.peers)
                for (int k : config.dim_j)
                    for (std::uint64_t seed : config.seeds) tasks.push_back({b, p_s, p, k, seed});
    return tasks;
}

namespace {

Eigen::MatrixXd restrict_columns(const Eigen::MatrixXd& x, const std::vector<int>& idx) {
    Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) {
        out.col(static_cast<Eigen::Index>(c)) = x.col(idx[c]);
    }
    return out;
}

double modal_gamma(const std::vector<double>& chosen) {
    std::map<double, int> counts;
    for (double g : chosen) ++counts[g];
    double best = chosen.front();
    int best_count = 0;
    for (const auto& [g, n] : counts) {
        if (n > best_count) {  // map iteration is ascending, ties keep the smaller
            best = g;
            best_count = n;
        }
    }
    return best;
}

struct TraceWriter {
    std::ofstream out;
    std::mutex mu;

    void write_line(const json& j) {
        std::scoped_lock lock(mu);
        out << j.dump() << "\n";
    }
};

ResultRecord run_cell(const Dataset& base, const std::vector<int>& candidate_order,
                      const ExperimentConfig& config, const CellTask& task,
                      TraceWriter* tracer) {
    ResultRecord rec;
    rec.domain = config.domain;
    rec.b = task.b;
    rec.p_s = task.p_s;
    rec.p = task.p;
    rec.dim_j = task.dim_j;
    rec.seed = task.seed;

    const int d = static_cast<int>(base.d());
    if (task.dim_j >= d || task.p > d - task.dim_j) {
        rec.status = "skipped";
        rec.note = "infeasible: need dim_j < d and p <= d - dim_j";
        warn(config.domain + ": skipping p=" + std::to_string(task.p) +
             " dim_j=" + std::to_string(task.dim_j) + " (" + rec.note + ")");
        return rec;
    }

    const std::vector<int> shared(candidate_order.begin(), candidate_order.begin() + task.dim_j);
    const Dataset data = base.with_shared(shared);

    const std::vector<int> fold = stratified_folds(
        std::span<const double>(data.y.data(), static_cast<std::size_t>(data.y.size())),
        config.folds, derive_seed(task.seed, 0xf01d));

    FoldErrors drl_folds{"drl", {}};
    FoldErrors oracle_folds{"oracle", {}};
    std::vector<FoldErrors> peer_folds(static_cast<std::size_t>(task.p));
    for (int j = 0; j < task.p; ++j) peer_folds[static_cast<std::size_t>(j)].learner =
        "peer_" + std::to_string(j);
    std::vector<double> chosen_gammas;
    double m_star_sum = 0.0;

    const std::uint64_t cell_tag =
        derive_seed(task.seed, static_cast<std::uint64_t>(task.b),
                    static_cast<std::uint64_t>(task.p), static_cast<std::uint64_t>(task.dim_j)) ^
        static_cast<std::uint64_t>(task.p_s * 1024.0);

    for (int f = 0; f < config.folds; ++f) {
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t i = 0; i < fold.size(); ++i) {
            (fold[i] == f ? test_rows : train_rows).push_back(i);
        }
        const Dataset train = data.select_rows(train_rows);
        const Dataset test = data.select_rows(test_rows);

        const BinningRule rule = fit_bins(train, task.b);
        const Dataset btrain = apply_bins(train, rule);
        const Dataset btest = apply_bins(test, rule);

        const std::vector<PeerView> views =
            split_peers(btrain, task.p, task.p_s, derive_seed(cell_tag, 1, static_cast<std::uint64_t>(f)));

        protocol::TraceHook hook = nullptr;
        if (tracer) {
            hook = [&](const protocol::PartRequest& req, const protocol::PartReply& rep) {
                tracer->write_line(
                    {{"domain", config.domain},
                     {"b", task.b},
                     {"p_s", task.p_s},
                     {"p", task.p},
                     {"dim_j", task.dim_j},
                     {"seed", task.seed},
                     {"fold", f},
                     {"sig", req.sig.values},
                     {"klass", req.sig.klass},
                     {"peer", rep.peer_id},
                     {"count", rep.count},
                     {"values",
                      std::vector<double>(rep.values.data(), rep.values.data() + rep.values.size())}});
            };
        }
        const protocol::CraftResult crafted = protocol::radocraft(views, rule, hook);

        const double gamma = cv_gamma_rados(crafted.rados, config.gamma_grid, config.folds,
                                            derive_seed(cell_tag, 2, static_cast<std::uint64_t>(f)));
        chosen_gammas.push_back(gamma);
        Model drl = solve_rados(crafted.rados, make_drl_regularizer(d, shared, gamma), "drl");
        drl.gamma_used = gamma;
        drl_folds.errors.push_back(test_error(drl, btest.x, btest.y));

        for (int j = 0; j < task.p; ++j) {
            const PeerView& view = views[static_cast<std::size_t>(j)];
            const double pg = select_gamma_examples(
                view.x, view.y, config.gamma_grid, config.folds,
                derive_seed(cell_tag, 3, static_cast<std::uint64_t>(f), static_cast<std::uint64_t>(j)));
            const Model peer =
                solve_examples(view.x, view.y,
                               uniform_regularizer(static_cast<int>(view.feature_idx.size()), pg),
                               "peer_" + std::to_string(j));
            const Eigen::MatrixXd test_local = restrict_columns(btest.x, view.feature_idx);
            peer_folds[static_cast<std::size_t>(j)].errors.push_back(
                test_error(peer, test_local, btest.y));
        }

        const double og = select_gamma_examples(btrain.x, btrain.y, config.gamma_grid, config.folds,
                                                derive_seed(cell_tag, 4, static_cast<std::uint64_t>(f)));
        const Model oracle = solve_examples(btrain.x, btrain.y, uniform_regularizer(d, og), "oracle");
        oracle_folds.errors.push_back(test_error(oracle, btest.x, btest.y));

        // Per-session communication claim: traffic within m* x d, and below
        // the m x d cost of shipping the entity-resolved table when m* < m.
        const auto m_star = static_cast<std::int64_t>(crafted.rados.size());
        const auto m_train = static_cast<std::int64_t>(btrain.m());
        const std::int64_t scalars = crafted.ledger.scalars_sent();
        if (scalars > m_star * d) rec.comm_claim_ok = false;
        if (m_star < m_train && scalars >= m_train * d) rec.comm_claim_ok = false;

        rec.scalars_sent += scalars;
        rec.messages_sent += crafted.ledger.messages_sent();
        m_star_sum += static_cast<double>(m_star);
    }

    rec.status = "ok";
    rec.err_drl = 0.0;
    for (double e : drl_folds.errors) rec.err_drl += e;
    rec.err_drl /= static_cast<double>(drl_folds.errors.size());
    rec.drl_fold_errors = drl_folds.errors;
    for (const FoldErrors& pf : peer_folds) {
        double mean = 0.0;
        for (double e : pf.errors) mean += e;
        rec.peer_errors.push_back(mean / static_cast<double>(pf.errors.size()));
    }
    rec.err_oracle = 0.0;
    for (double e : oracle_folds.errors) rec.err_oracle += e;
    rec.err_oracle /= static_cast<double>(oracle_folds.errors.size());

    rec.delta = delta_metric(rec.err_drl, rec.peer_errors);
    rec.q = q_metric(drl_folds, peer_folds);
    rec.oracle_sig_better = paired_t_pvalue_less(oracle_folds.errors, drl_folds.errors) < 0.05;
    rec.gamma_drl = modal_gamma(chosen_gammas);
    rec.m_star_mean = m_star_sum / static_cast<double>(config.folds);
    return rec;
}

}  // namespace

std::vector<ResultRecord> run_experiment(const ExperimentConfig& config,
                                         const RunOptions& options) {
    config.validate();
    const Dataset base = load_csv(config.dataset_path, config.label_column, config.positive_label);

    std::vector<int> candidate_order;
    if (!config.shared_candidates.empty()) {
        for (const std::string& name : config.shared_candidates) {
            const auto it =
                std::find(base.feature_names.begin(), base.feature_names.end(), name);
            if (it == base.feature_names.end())
                throw std::invalid_argument("config: unknown shared candidate '" + name + "'");
            candidate_order.push_back(static_cast<int>(it - base.feature_names.begin()));
        }
    } else {
        candidate_order = shared_candidate_order(base);
    }

    std::unique_ptr<TraceWriter> tracer;
    if (options.trace_path) {
        tracer = std::make_unique<TraceWriter>();
        fs::create_directories(fs::path(*options.trace_path).parent_path());
        tracer->out.open(*options.trace_path);
        if (!tracer->out)
            throw std::runtime_error("cannot open trace file " + *options.trace_path);
    }

    const std::vector<CellTask> tasks = plan_cells(config);
    std::vector<ResultRecord> records(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex error_mu;
    std::string first_error;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                records[i] = run_cell(base, candidate_order, config, tasks[i], tracer.get());
            } catch (const std::exception& e) {
                std::scoped_lock lock(error_mu);
                if (first_error.empty()) first_error = e.what();
                return;
            }
        }
    };

    const int threads = std::max(1, options.threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (!first_error.empty()) throw std::runtime_error(first_error);
    return records;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, ptr};
}

std::string join_semicolon(const std::vector<double>& vs) {
    std::string out;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (i) out += ";";
        out += fmt(vs[i]);
    }
    return out;
}

json record_to_json(const ResultRecord& r) {
    return {{"domain", r.domain},
            {"b", r.b},
            {"p_s", r.p_s},
            {"p", r.p},
            {"dim_j", r.dim_j},
            {"seed", r.seed},
            {"status", r.status},
            {"note", r.note},
            {"err_drl", r.err_drl},
            {"err_oracle", r.err_oracle},
            {"peer_errors", r.peer_errors},
            {"drl_fold_errors", r.drl_fold_errors},
            {"delta", r.delta},
            {"q", r.q},
            {"oracle_sig_better", r.oracle_sig_better},
            {"gamma_drl", r.gamma_drl},
            {"m_star_mean", r.m_star_mean},
            {"scalars_sent", r.scalars_sent},
            {"messages_sent", r.messages_sent},
            {"comm_claim_ok", r.comm_claim_ok}};
}

std::vector<ResultRecord> sorted_records(std::vector<ResultRecord> records) {
    std::stable_sort(records.begin(), records.end(),
                     [](const ResultRecord& a, const ResultRecord& b) {
                         return std::tie(a.domain, a.b, a.p_s, a.p, a.dim_j, a.seed) <
                                std::tie(b.domain, b.b, b.p_s, b.p, b.dim_j, b.seed);
                     });
    return records;
}

}  // namespace

void emit_tables(const std::vector<ResultRecord>& raw, const std::string& out_dir) {
    if (raw.empty()) throw std::invalid_argument("emit_tables: no records");
    fs::create_directories(out_dir);
    const std::vector<ResultRecord> records = sorted_records(raw);

    {
        std::ofstream csv(fs::path(out_dir) / "results.csv", std::ios::binary);
        if (!csv) throw std::runtime_error("emit_tables: cannot write results.csv");
        csv << "domain,b,p_s,p,dim_j,seed,status,err_drl,err_oracle,err_best_peer,peer_errors,"
               "delta,q,oracle_sig_better,gamma_drl,m_star_mean,scalars_sent,messages_sent,"
               "comm_claim_ok,note\n";
        for (const ResultRecord& r : records) {
            const double best_peer =
                r.peer_errors.empty()
                    ? 0.0
                    : *std::min_element(r.peer_errors.begin(), r.peer_errors.end());
            csv << r.domain << "," << r.b << "," << fmt(r.p_s) << "," << r.p << "," << r.dim_j
                << "," << r.seed << "," << r.status << "," << fmt(r.err_drl) << ","
                << fmt(r.err_oracle) << "," << fmt(best_peer) << "," << join_semicolon(r.peer_errors)
                << "," << fmt(r.delta) << "," << fmt(r.q) << ","
                << (r.oracle_sig_better ? "1" : "0") << "," << fmt(r.gamma_drl) << ","
                << fmt(r.m_star_mean) << "," << r.scalars_sent << "," << r.messages_sent << ","
                << (r.comm_claim_ok ? "1" : "0") << "," << r.note << "\n";
        }
    }
    {
        json j = json::array();
        for (const ResultRecord& r : records) j.push_back(record_to_json(r));
        std::ofstream out(fs::path(out_dir) / "results.json", std::ios::binary);
        out << j.dump(2) << "\n";
    }

    // Long-format surfaces: one row per (b, p_s, p, dim_j), averaged over seeds.
    for (const std::string metric : {"delta", "q"}) {
        std::map<std::tuple<int, double, int, int>, std::pair<double, int>> acc;
        for (const ResultRecord& r : records) {
            if (r.status != "ok") continue;
            auto& [sum, n] = acc[{r.b, r.p_s, r.p, r.dim_j}];
            sum += metric == "delta" ? r.delta : r.q;
            ++n;
        }
        std::ofstream out(fs::path(out_dir) / (metric + "_surface.csv"), std::ios::binary);
        out << "b,p_s,p,dim_j," << metric << "\n";
        for (const auto& [key, val] : acc) {
            const auto& [b, p_s, p, dim_j] = key;
            out << b << "," << fmt(p_s) << "," << p << "," << dim_j << ","
                << fmt(val.first / val.second) << "\n";
        }
    }
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Entity-resolution-free distributed learning experiment runner"};

    std::string config_path;
    std::string out_override;
    std::string seeds_csv;
    RunOptions options;
    bool trace = false;

    app.add_option("--config", config_path, "experiment config (JSON)")->required();
    app.add_option("--out", out_override, "output directory (overrides config)");
    app.add_option("--seeds", seeds_csv, "comma-separated seed list (overrides config)");
    app.add_option("--threads", options.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--trace-protocol", trace, "dump JSON-lines protocol traces");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    ExperimentConfig config;
    try {
        config = ExperimentConfig::from_file(config_path);
        if (!out_override.empty()) config.output_dir = out_override;
        if (!seeds_csv.empty()) {
            config.seeds.clear();
            std::istringstream in(seeds_csv);
            std::string tok;
            while (std::getline(in, tok, ',')) {
                config.seeds.push_back(std::stoull(tok));
            }
            config.validate();
        }
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (trace) {
            options.trace_path = (fs::path(config.output_dir) / "protocol_trace.jsonl").string();
        }
        const std::vector<ResultRecord> records = run_experiment(config, options);
        emit_tables(records, config.output_dir);
        std::size_t ok = 0;
        for (const ResultRecord& r : records) ok += r.status == "ok";
        std::cout << config.domain << ": " << ok << "/" << records.size()
                  << " grid cells completed, results in " << config.output_dir << "\n";
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace rado
