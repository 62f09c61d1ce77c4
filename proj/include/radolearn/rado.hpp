#pragma once

#include <Eigen/Dense>
#include <compare>
#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "radolearn/dataset.hpp"

namespace rado {

/// Block identity: the binned shared-feature values plus the class. Values
/// are bin representatives, so exact comparison is safe.
struct Signature {
    std::vector<double> values;
    int klass = +1;  // -1 or +1

    bool operator==(const Signature& o) const = default;
    bool operator<(const Signature& o) const {
        if (values != o.values) return values < o.values;
        return klass < o.klass;
    }
};

/// One crafted basic-block observation: the d-dimensional vector
/// u * lift(klass * signature) + sum of lifted peer contributions,
/// with the per-peer match counts that produced the weight.
struct BlockRado {
    Signature sig;
    Eigen::VectorXd v;
    double u = 0.0;
    std::vector<std::int64_t> counts;  // C_j per peer
};

struct RadoSet {
    std::vector<BlockRado> blocks;
    int dim = 0;
    std::vector<int> shared_idx;

    std::size_t size() const { return blocks.size(); }

    // Columnar artifact: one row per block (signature values, class, u, d
    // coordinates). This file is the only learning input the solver needs.
    std::string to_csv() const;
    static RadoSet from_csv(const std::string& text);
    nlohmann::json to_json() const;
    static RadoSet from_json(const nlohmann::json& j);
};

/// Restriction of `v` to `idx`, in idx order.
Eigen::VectorXd proj(const Eigen::VectorXd& v, const std::vector<int>& idx);

/// Completion of `v` (carried on `from_idx`) with zeros up to dimension `dim`.
Eigen::VectorXd lift(const Eigen::VectorXd& v, const std::vector<int>& from_idx, int dim);

struct PeerRado {
    Eigen::VectorXd values;  // over the peer's own (non-shared) features
    std::int64_t count = 0;  // matching rows
};

/// Sum of edge vectors y_i * x_i over the peer's rows matching the signature,
/// projected onto the peer's own features. Addends are accumulated in sorted
/// order per coordinate, so the result is independent of the row shuffle.
PeerRado peer_rado(const PeerView& view, const Signature& sig);

struct PeerPart {
    std::vector<int> own_idx;  // global indices of the peer's own features
    Eigen::VectorXd values;    // peer rado over own_idx
    std::int64_t count = 0;
};

/// Builds one basic-block observation from per-peer parts: accumulates the
/// counter over non-shared features, derives the weight
/// u = (sum of counter) / (d - dim(J)), and assembles the lifted vector.
BlockRado assemble_block(const Signature& sig, const std::vector<PeerPart>& parts, int dim,
                         const std::vector<int>& shared_idx);

/// All (binned shared values, class) pairs observed at any peer, in
/// lexicographic order. This is exactly the populated block index set.
std::vector<Signature> enumerate_signatures(const std::vector<PeerView>& peers);

/// Direct (non-message-passing) crafting path: fold of peer_rado and
/// assemble_block over the peers. The protocol layer must reproduce this
/// output bit for bit.
RadoSet craft_blocks(const std::vector<PeerView>& peers);

/// All 2^m sign-vector observations of a small sample. Guarded at m <= 20.
std::vector<Eigen::VectorXd> enumerate_all_rados(const Dataset& data);

/// Test oracle: the sum of full-dimensional edge vectors of the total-sample
/// rows matching the signature. Requires entity-resolved data, so it is only
/// meaningful in tests.
Eigen::VectorXd oracle_block_sum(const Dataset& data, const Signature& sig);

}  // namespace rado
