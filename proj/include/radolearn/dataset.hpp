#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

namespace rado {

/// In-memory classification sample: m rows over d named real features with
/// labels in {-1,+1}. `shared_idx` lists the features every peer will hold
/// (the signature features), in their declared order.
struct Dataset {
    Eigen::MatrixXd x;                       // m x d
    Eigen::VectorXd y;                       // entries exactly -1 or +1
    std::vector<std::string> feature_names;  // size d
    std::vector<int> shared_idx;             // ordered, no duplicates, |J| < d
    bool binned = false;                     // set once apply_bins has run

    Eigen::Index m() const { return x.rows(); }
    Eigen::Index d() const { return x.cols(); }

    bool is_shared(int feature) const;
    std::vector<int> nonshared_idx() const;
    Dataset with_shared(std::vector<int> shared) const;
    Dataset select_rows(const std::vector<std::size_t>& rows) const;
    void validate() const;
};

Dataset load_csv(const std::string& path, const std::string& label_column,
                 const std::string& positive_label);

// Equal-frequency binning of one shared feature: `cuts` are strictly
// increasing boundary values (a value equal to a cut belongs to the lower
// bin), `reps` the per-bin representatives after rescaling to [-1, 1].
struct FeatureBins {
    std::vector<double> cuts;
    std::vector<double> reps;
};

// Min-max range of a non-shared feature on the training fold.
struct ColumnScale {
    double lo = 0.0;
    double hi = 0.0;
};

struct BinningRule {
    std::vector<int> shared_idx;
    std::vector<FeatureBins> shared_bins;  // parallel to shared_idx
    std::vector<int> nonshared_idx;
    std::vector<ColumnScale> scales;  // parallel to nonshared_idx
    int requested_bins = 0;

    int effective_bins(std::size_t shared_pos) const {
        return static_cast<int>(shared_bins[shared_pos].reps.size());
    }
    double bin_value(std::size_t shared_pos, double value) const;

    nlohmann::json to_json() const;
    static BinningRule from_json(const nlohmann::json& j);
};

BinningRule fit_bins(const Dataset& data, int bins);
Dataset apply_bins(const Dataset& data, const BinningRule& rule);

/// One peer's local table: all of its own non-shared features plus the shared
/// features and the class. Rows are shuffled (and possibly duplicated across
/// peers), so row order carries no entity information.
struct PeerView {
    int peer_id = 0;
    std::vector<int> feature_idx;  // ascending global indices: own U shared
    std::vector<int> own_idx;      // ascending global indices of own features
    std::vector<int> shared_pos;   // column of each shared feature, in J order
    std::vector<int> own_pos;      // column of each own feature
    Eigen::MatrixXd x;             // m_j x d_j
    Eigen::VectorXd y;
    std::vector<std::size_t> provenance;  // true row ids; test-only, never used to learn

    Eigen::Index rows() const { return x.rows(); }
};

std::vector<PeerView> split_peers(const Dataset& data, int peers, double share_proportion,
                                  std::uint64_t seed);

// Feature order used to pick shared features: ascending variance of the
// min-max normalised column, ties by index. dim(J)=k takes the first k.
std::vector<int> shared_candidate_order(const Dataset& data);

}  // namespace rado
