#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "radolearn/dataset.hpp"
#include "radolearn/eval.hpp"
#include "radolearn/experiment.hpp"
#include "radolearn/learner.hpp"
#include "radolearn/protocol.hpp"
#include "radolearn/rado.hpp"

namespace py = pybind11;
using namespace rado;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Entity-resolution-free learning over vertically partitioned peers";

    py::class_<Dataset>(m, "Dataset")
        .def_readonly("x", &Dataset::x)
        .def_readonly("y", &Dataset::y)
        .def_readonly("feature_names", &Dataset::feature_names)
        .def_readonly("shared_idx", &Dataset::shared_idx)
        .def_readonly("binned", &Dataset::binned)
        .def("with_shared", &Dataset::with_shared)
        .def_property_readonly("m", &Dataset::m)
        .def_property_readonly("d", &Dataset::d);

    py::class_<BinningRule>(m, "BinningRule")
        .def_property_readonly("shared_idx",
                               [](const BinningRule& r) { return r.shared_idx; })
        .def("to_json", [](const BinningRule& r) { return r.to_json().dump(); })
        .def_static("from_json", [](const std::string& text) {
            return BinningRule::from_json(nlohmann::json::parse(text));
        });

    py::class_<PeerView>(m, "PeerView")
        .def_readonly("peer_id", &PeerView::peer_id)
        .def_readonly("feature_idx", &PeerView::feature_idx)
        .def_readonly("own_idx", &PeerView::own_idx)
        .def_readonly("x", &PeerView::x)
        .def_readonly("y", &PeerView::y);

    py::class_<Signature>(m, "Signature")
        .def(py::init([](std::vector<double> values, int klass) {
                 return Signature{std::move(values), klass};
             }),
             py::arg("values"), py::arg("klass"))
        .def_readonly("values", &Signature::values)
        .def_readonly("klass", &Signature::klass)
        .def("__eq__", [](const Signature& a, const Signature& b) { return a == b; });

    py::class_<BlockRado>(m, "BlockRado")
        .def_readonly("sig", &BlockRado::sig)
        .def_readonly("v", &BlockRado::v)
        .def_readonly("u", &BlockRado::u)
        .def_readonly("counts", &BlockRado::counts);

    py::class_<RadoSet>(m, "RadoSet")
        .def_readonly("blocks", &RadoSet::blocks)
        .def_readonly("dim", &RadoSet::dim)
        .def_readonly("shared_idx", &RadoSet::shared_idx)
        .def("__len__", &RadoSet::size)
        .def("to_csv", &RadoSet::to_csv)
        .def_static("from_csv", &RadoSet::from_csv);

    py::class_<protocol::CommLedger>(m, "CommLedger")
        .def_property_readonly("scalars_sent", &protocol::CommLedger::scalars_sent)
        .def_property_readonly("messages_sent", &protocol::CommLedger::messages_sent);

    py::class_<Model>(m, "Model")
        .def_readonly("theta", &Model::theta)
        .def_readonly("trained_on", &Model::trained_on)
        .def_readonly("gamma_used", &Model::gamma_used)
        .def("to_json", [](const Model& mm) { return mm.to_json().dump(); });

    py::class_<Regularizer>(m, "Regularizer").def_readonly("diag", &Regularizer::diag);

    py::class_<FoldErrors>(m, "FoldErrors")
        .def(py::init([](std::string learner, std::vector<double> errors) {
                 return FoldErrors{std::move(learner), std::move(errors)};
             }),
             py::arg("learner"), py::arg("errors"))
        .def_readonly("learner", &FoldErrors::learner)
        .def_readonly("errors", &FoldErrors::errors);

    m.def("load_csv", &load_csv, py::arg("path"), py::arg("label_column"),
          py::arg("positive_label"));
    m.def("fit_bins", &fit_bins, py::arg("data"), py::arg("bins"));
    m.def("apply_bins", &apply_bins, py::arg("data"), py::arg("rule"));
    m.def("split_peers", &split_peers, py::arg("data"), py::arg("peers"),
          py::arg("share_proportion"), py::arg("seed"));
    m.def("shared_candidate_order", &shared_candidate_order);

    m.def("proj", &proj);
    m.def("lift", &lift);
    m.def("enumerate_signatures", &enumerate_signatures);
    m.def("craft_blocks", &craft_blocks);
    m.def("enumerate_all_rados", &enumerate_all_rados);
    m.def("oracle_block_sum", &oracle_block_sum);
    m.def(
        "radocraft",
        [](const std::vector<PeerView>& peers, const BinningRule& rule) {
            auto result = protocol::radocraft(peers, rule);
            return py::make_tuple(std::move(result.rados), std::move(result.ledger));
        },
        py::arg("peers"), py::arg("rule"));

    m.def("square_loss",
          py::overload_cast<const Eigen::MatrixXd&, const Eigen::VectorXd&,
                            const Eigen::VectorXd&, const Regularizer&>(&square_loss));
    m.def("m_loss",
          py::overload_cast<const std::vector<Eigen::VectorXd>&, const Eigen::VectorXd&>(&m_loss));
    m.def("uniform_regularizer", &uniform_regularizer, py::arg("dim"), py::arg("gamma"));
    m.def("make_drl_regularizer", &make_drl_regularizer, py::arg("dim"), py::arg("shared_idx"),
          py::arg("gamma"));
    m.def("solve_examples",
          py::overload_cast<const Eigen::MatrixXd&, const Eigen::VectorXd&, const Regularizer&,
                            const std::string&>(&solve_examples),
          py::arg("x"), py::arg("y"), py::arg("reg"), py::arg("descriptor") = "examples");
    m.def("solve_rados", &solve_rados, py::arg("rados"), py::arg("reg"),
          py::arg("descriptor") = "drl");
    m.def("cv_gamma_rados", &cv_gamma_rados, py::arg("rados"), py::arg("grid"), py::arg("folds"),
          py::arg("seed"));

    m.def("test_error",
          py::overload_cast<const Eigen::VectorXd&, const Eigen::MatrixXd&,
                            const Eigen::VectorXd&>(&test_error));
    m.def("delta_metric", &delta_metric);
    m.def("bh_reject", &bh_reject, py::arg("pvalues"), py::arg("alpha"));
    m.def("q_metric", &q_metric, py::arg("drl"), py::arg("peers"), py::arg("alpha") = 0.05);
    m.def("oracle_baseline", &oracle_baseline, py::arg("data"), py::arg("grid"), py::arg("folds"),
          py::arg("seed"));

    m.def(
        "run_experiment",
        [](const std::string& config_path, const std::string& out_dir, int threads) {
            auto config = ExperimentConfig::from_file(config_path);
            if (!out_dir.empty()) config.output_dir = out_dir;
            RunOptions options;
            options.threads = threads;
            const auto records = run_experiment(config, options);
            emit_tables(records, config.output_dir);
            py::list out;
            for (const auto& r : records) {
                py::dict d;
                d["domain"] = r.domain;
                d["b"] = r.b;
                d["p_s"] = r.p_s;
                d["p"] = r.p;
                d["dim_j"] = r.dim_j;
                d["seed"] = r.seed;
                d["status"] = r.status;
                d["err_drl"] = r.err_drl;
                d["err_oracle"] = r.err_oracle;
                d["peer_errors"] = r.peer_errors;
                d["delta"] = r.delta;
                d["q"] = r.q;
                d["gamma_drl"] = r.gamma_drl;
                d["m_star_mean"] = r.m_star_mean;
                d["scalars_sent"] = r.scalars_sent;
                d["comm_claim_ok"] = r.comm_claim_ok;
                out.append(std::move(d));
            }
            return out;
        },
        py::arg("config_path"), py::arg("out_dir") = "", py::arg("threads") = 1);
}
