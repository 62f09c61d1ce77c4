#include "radolearn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "radolearn/common.hpp"

namespace rado {

bool Dataset::is_shared(int feature) const {
    return std::find(shared_idx.begin(), shared_idx.end(), feature) != shared_idx.end();
}

std::vector<int> Dataset::nonshared_idx() const {
    std::vector<int> out;
    for (int k = 0; k < d(); ++k) {
        if (!is_shared(k)) out.push_back(k);
    }
    return out;
}

Dataset Dataset::with_shared(std::vector<int> shared) const {
    Dataset out = *this;
    out.shared_idx = std::move(shared);
    out.validate();
    return out;
}

Dataset Dataset::select_rows(const std::vector<std::size_t>& rows) const {
    Dataset out = *this;
    out.x.resize(static_cast<Eigen::Index>(rows.size()), d());
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.x.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
        out.y(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

void Dataset::validate() const {
    if (x.rows() != y.size()) throw std::invalid_argument("Dataset: row/label count mismatch");
    if (static_cast<Eigen::Index>(feature_names.size()) != x.cols())
        throw std::invalid_argument("Dataset: feature name count mismatch");
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y(i) != 1.0 && y(i) != -1.0)
            throw std::invalid_argument("Dataset: labels must be exactly -1 or +1");
    }
    if (!x.allFinite()) throw std::invalid_argument("Dataset: non-finite feature value");
    std::set<int> seen;
    for (int k : shared_idx) {
        if (k < 0 || k >= d()) throw std::invalid_argument("Dataset: shared index out of range");
        if (!seen.insert(k).second) throw std::invalid_argument("Dataset: duplicate shared index");
    }
    if (!shared_idx.empty() && static_cast<Eigen::Index>(shared_idx.size()) >= d())
        throw std::invalid_argument("Dataset: at least one non-shared feature required");
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

double parse_cell(const std::string& raw, std::size_t row, const std::string& column) {
    const std::string s = trim(raw);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
        std::ostringstream msg;
        msg << "load_csv: unparseable value '" << raw << "' at row " << row << ", column "
            << column;
        throw std::runtime_error(msg.str());
    }
    return value;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column,
                 const std::string& positive_label) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty file " + path);
    const std::vector<std::string> header = split_line(line);

    int label_col = -1;
    std::vector<std::string> names;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string name = trim(header[c]);
        if (name == label_column) {
            label_col = static_cast<int>(c);
        } else {
            names.push_back(name);
        }
    }
    if (label_col < 0)
        throw std::runtime_error("load_csv: label column '" + label_column + "' not found");

    std::vector<std::vector<double>> rows;
    std::vector<double> labels;
    std::set<std::string> label_values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size()) {
            std::ostringstream msg;
            msg << "load_csv: row " << lineno << " has " << cells.size() << " cells, expected "
                << header.size();
            throw std::runtime_error(msg.str());
        }
        std::vector<double> row;
        row.reserve(names.size());
        std::string label;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (static_cast<int>(c) == label_col) {
                label = trim(cells[c]);
            } else {
                row.push_back(parse_cell(cells[c], lineno, trim(header[c])));
            }
        }
        label_values.insert(label);
        labels.push_back(label == positive_label ? 1.0 : -1.0);
        rows.push_back(std::move(row));
    }

    if (label_values.size() > 2)
        throw std::runtime_error("load_csv: label column has more than two distinct values");
    if (!label_values.count(positive_label))
        throw std::runtime_error("load_csv: positive label '" + positive_label +
                                 "' never appears");

    Dataset out;
    out.feature_names = names;
    out.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < names.size(); ++c) {
            out.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
        }
        out.y(static_cast<Eigen::Index>(i)) = labels[i];
    }
    out.validate();
    return out;
}

double BinningRule::bin_value(std::size_t shared_pos, double value) const {
    const FeatureBins& fb = shared_bins[shared_pos];
    std::size_t bin = 0;
    for (double cut : fb.cuts) {
        if (cut < value) ++bin;  // value == cut stays in the lower bin
    }
    return fb.reps[std::min(bin, fb.reps.size() - 1)];
}

namespace {

// Equal-frequency bins of one column. Edges are the last order statistic of
// each quantile group; duplicate edges collapse, so low-cardinality columns
// yield fewer bins than requested.
FeatureBins fit_feature_bins(std::vector<double> values, int bins, const std::string& name) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();

    std::vector<double> edges;
    for (int k = 1; k < bins; ++k) {
        const std::size_t pos =
            (static_cast<std::size_t>(k) * n + static_cast<std::size_t>(bins) - 1) /
                static_cast<std::size_t>(bins) -
            1;
        edges.push_back(values[pos]);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    const std::size_t nbins = edges.size() + 1;
    std::vector<double> lo(nbins), hi(nbins);
    std::vector<std::size_t> count(nbins, 0);
    for (double v : values) {
        std::size_t b = 0;
        for (double e : edges) {
            if (e < v) ++b;
        }
        if (count[b] == 0) {
            lo[b] = hi[b] = v;
        } else {
            lo[b] = std::min(lo[b], v);
            hi[b] = std::max(hi[b], v);
        }
        ++count[b];
    }

    FeatureBins out;
    std::vector<double> mids;
    for (std::size_t b = 0; b < nbins; ++b) {
        if (count[b] == 0) continue;  // trailing group emptied by edge collapse
        if (!mids.empty()) out.cuts.push_back(edges[b - 1]);
        mids.push_back(0.5 * (lo[b] + hi[b]));
    }
    if (mids.size() == 1) {
        warn("fit_bins: shared feature '" + name + "' is constant on the training rows");
        out.reps = {0.0};
        return out;
    }
    const double rmin = mids.front();
    const double rmax = mids.back();
    for (double r : mids) out.reps.push_back(-1.0 + 2.0 * (r - rmin) / (rmax - rmin));
    return out;
}

}  // namespace

BinningRule fit_bins(const Dataset& data, int bins) {
    if (bins < 2) throw std::invalid_argument("fit_bins: need at least 2 bins");
    if (data.shared_idx.empty()) throw std::invalid_argument("fit_bins: no shared features");
    if (data.m() == 0) throw std::invalid_argument("fit_bins: empty dataset");

    BinningRule rule;
    rule.requested_bins = bins;
    rule.shared_idx = data.shared_idx;
    for (int k : data.shared_idx) {
        std::vector<double> col(data.x.col(k).data(), data.x.col(k).data() + data.m());
        rule.shared_bins.push_back(fit_feature_bins(std::move(col), bins, data.feature_names[k]));
    }
    rule.nonshared_idx = data.nonshared_idx();
    for (int k : rule.nonshared_idx) {
        ColumnScale s;
        s.lo = data.x.col(k).minCoeff();
        s.hi = data.x.col(k).maxCoeff();
        rule.scales.push_back(s);
    }
    return rule;
}

Dataset apply_bins(const Dataset& data, const BinningRule& rule) {
    if (data.shared_idx != rule.shared_idx)
        throw std::invalid_argument("apply_bins: rule fitted for a different shared set");
    if (data.binned) return data;

    Dataset out = data;
    for (std::size_t t = 0; t < rule.shared_idx.size(); ++t) {
        const int k = rule.shared_idx[t];
        for (Eigen::Index i = 0; i < out.m(); ++i) {
            out.x(i, k) = rule.bin_value(t, out.x(i, k));
        }
    }
    for (std::size_t t = 0; t < rule.nonshared_idx.size(); ++t) {
        const int k = rule.nonshared_idx[t];
        const ColumnScale& s = rule.scales[t];
        const double range = s.hi - s.lo;
        for (Eigen::Index i = 0; i < out.m(); ++i) {
            out.x(i, k) = range > 0.0 ? -1.0 + 2.0 * (out.x(i, k) - s.lo) / range : 0.0;
        }
    }
    out.binned = true;
    return out;
}

nlohmann::json BinningRule::to_json() const {
    nlohmann::json j;
    j["requested_bins"] = requested_bins;
    j["shared"] = nlohmann::json::array();
    for (std::size_t t = 0; t < shared_idx.size(); ++t) {
        j["shared"].push_back({{"feature", shared_idx[t]},
                               {"cuts", shared_bins[t].cuts},
                               {"reps", shared_bins[t].reps}});
    }
    j["nonshared"] = nlohmann::json::array();
    for (std::size_t t = 0; t < nonshared_idx.size(); ++t) {
        j["nonshared"].push_back(
            {{"feature", nonshared_idx[t]}, {"lo", scales[t].lo}, {"hi", scales[t].hi}});
    }
    return j;
}

BinningRule BinningRule::from_json(const nlohmann::json& j) {
    BinningRule rule;
    rule.requested_bins = j.at("requested_bins").get<int>();
    for (const auto& e : j.at("shared")) {
        rule.shared_idx.push_back(e.at("feature").get<int>());
        FeatureBins fb;
        fb.cuts = e.at("cuts").get<std::vector<double>>();
        fb.reps = e.at("reps").get<std::vector<double>>();
        rule.shared_bins.push_back(std::move(fb));
    }
    for (const auto& e : j.at("nonshared")) {
        rule.nonshared_idx.push_back(e.at("feature").get<int>());
        rule.scales.push_back({e.at("lo").get<double>(), e.at("hi").get<double>()});
    }
    return rule;
}

std::vector<PeerView> split_peers(const Dataset& data, int peers, double share_proportion,
                                  std::uint64_t seed) {
    data.validate();
    if (data.shared_idx.empty()) throw std::invalid_argument("split_peers: no shared features");
    if (peers < 2) throw std::invalid_argument("split_peers: need at least 2 peers");
    if (share_proportion < 0.0 || share_proportion > 1.0)
        throw std::invalid_argument("split_peers: share proportion outside [0,1]");
    const std::vector<int> nonshared = data.nonshared_idx();
    if (static_cast<std::size_t>(peers) > nonshared.size())
        throw std::invalid_argument("split_peers: more peers than non-shared features");

    const std::size_t m = static_cast<std::size_t>(data.m());
    std::vector<std::vector<int>> own(peers);
    for (std::size_t i = 0; i < nonshared.size(); ++i) {
        own[i % static_cast<std::size_t>(peers)].push_back(nonshared[i]);
    }

    Rng rng(seed);

    // Every peer starts from the full sample restricted to its features; with
    // share_proportion > 0 each peer pushes duplicates of some of its rows to
    // a random other peer, which breaks the one-to-one row correspondence.
    std::vector<std::vector<std::size_t>> local_rows(peers);
    for (int j = 0; j < peers; ++j) {
        local_rows[j].resize(m);
        for (std::size_t i = 0; i < m; ++i) local_rows[j][i] = i;
    }
    if (share_proportion > 0.0) {
        const std::size_t dup =
            static_cast<std::size_t>(std::ceil(share_proportion * static_cast<double>(m)));
        for (int j = 0; j < peers; ++j) {
            for (std::size_t i : rng.sample_without_replacement(m, dup)) {
                std::uint64_t other = rng.bounded(static_cast<std::uint64_t>(peers - 1));
                if (other >= static_cast<std::uint64_t>(j)) ++other;
                local_rows[static_cast<std::size_t>(other)].push_back(i);
            }
        }
    }

    std::vector<PeerView> views;
    for (int j = 0; j < peers; ++j) {
        rng.shuffle(local_rows[j]);

        PeerView v;
        v.peer_id = j;
        v.own_idx = own[j];
        v.feature_idx = own[j];
        v.feature_idx.insert(v.feature_idx.end(), data.shared_idx.begin(), data.shared_idx.end());
        std::sort(v.feature_idx.begin(), v.feature_idx.end());
        auto pos_of = [&](int k) {
            return static_cast<int>(std::find(v.feature_idx.begin(), v.feature_idx.end(), k) -
                                    v.feature_idx.begin());
        };
        for (int k : data.shared_idx) v.shared_pos.push_back(pos_of(k));
        for (int k : v.own_idx) v.own_pos.push_back(pos_of(k));

        const Eigen::Index mj = static_cast<Eigen::Index>(local_rows[j].size());
        v.x.resize(mj, static_cast<Eigen::Index>(v.feature_idx.size()));
        v.y.resize(mj);
        for (Eigen::Index r = 0; r < mj; ++r) {
            const std::size_t src = local_rows[j][static_cast<std::size_t>(r)];
            for (std::size_t c = 0; c < v.feature_idx.size(); ++c) {
                v.x(r, static_cast<Eigen::Index>(c)) =
                    data.x(static_cast<Eigen::Index>(src), v.feature_idx[c]);
            }
            v.y(r) = data.y(static_cast<Eigen::Index>(src));
        }
        v.provenance = local_rows[j];
        views.push_back(std::move(v));
    }
    return views;
}

std::vector<int> shared_candidate_order(const Dataset& data) {
    std::vector<std::pair<double, int>> ranked;
    for (int k = 0; k < data.d(); ++k) {
        const auto col = data.x.col(k);
        const double lo = col.minCoeff();
        const double hi = col.maxCoeff();
        double variance = 0.0;
        if (hi > lo) {
            Eigen::VectorXd scaled = (col.array() - lo) / (hi - lo);
            const double mean = scaled.mean();
            variance = (scaled.array() - mean).square().mean();
        }
        ranked.emplace_back(variance, k);
    }
    std::stable_sort(ranked.begin(), ranked.end());
    std::vector<int> order;
    for (const auto& [v, k] : ranked) order.push_back(k);
    return order;
}

}  // namespace rado
