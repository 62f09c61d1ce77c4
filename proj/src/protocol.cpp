#include "radolearn/protocol.hpp"

#include <algorithm>
#include <set>

namespace rado::protocol {

namespace {

// Peer-side handler: peers are stateless per request and never see each
// other's replies; only the coordinator aggregates.
PartReply answer_part_request(const PeerView& view, const PartRequest& req) {
    PeerRado r = peer_rado(view, req.sig);
    return {view.peer_id, std::move(r.values), r.count};
}

void check_schema(const std::vector<PeerView>& peers, const BinningRule& rule) {
    if (peers.size() < 2) throw std::invalid_argument("radocraft: need at least 2 peers");
    const std::size_t arity = rule.shared_idx.size();
    for (const PeerView& view : peers) {
        if (view.shared_pos.size() != arity)
            throw std::invalid_argument("radocraft: inconsistent shared schema across peers");
        for (std::size_t t = 0; t < arity; ++t) {
            const auto& reps = rule.shared_bins[t].reps;
            for (Eigen::Index r = 0; r < view.rows(); ++r) {
                const double v = view.x(r, view.shared_pos[t]);
                if (std::find(reps.begin(), reps.end(), v) == reps.end())
                    throw std::invalid_argument(
                        "radocraft: peer holds a shared value outside the binning rule");
            }
        }
    }
}

}  // namespace

CraftResult radocraft(const std::vector<PeerView>& peers, const BinningRule& rule,
                      const TraceHook& trace) {
    check_schema(peers, rule);

    std::set<int> all_features;
    for (const PeerView& v : peers) {
        all_features.insert(v.feature_idx.begin(), v.feature_idx.end());
    }
    const int dim = *all_features.rbegin() + 1;
    std::vector<int> shared_idx;
    for (std::size_t t = 0; t < peers.front().shared_pos.size(); ++t) {
        shared_idx.push_back(peers.front().feature_idx[peers.front().shared_pos[t]]);
    }

    CraftResult result;
    result.rados.dim = dim;
    result.rados.shared_idx = shared_idx;
    result.ledger = CommLedger(peers.size());

    for (const Signature& sig : enumerate_signatures(peers)) {
        std::vector<PeerPart> parts;
        for (const PeerView& view : peers) {
            const PartRequest request{sig, view.peer_id};
            result.ledger.record_request(view.peer_id);
            PartReply reply = answer_part_request(view, request);
            if (reply.values.size() !=
                static_cast<Eigen::Index>(view.feature_idx.size() - shared_idx.size()))
                throw std::runtime_error("radocraft: reply with wrong dimensionality");
            // reply payload: the rado scalars plus the match count
            result.ledger.record_reply(view.peer_id, reply.values.size() + 1);
            if (trace) trace(request, reply);
            parts.push_back({view.own_idx, std::move(reply.values), reply.count});
        }
        BlockRado block = assemble_block(sig, parts, dim, shared_idx);
        if (std::any_of(block.counts.begin(), block.counts.end(),
                        [](std::int64_t c) { return c > 0; })) {
            result.rados.blocks.push_back(std::move(block));
        }
    }
    return result;
}

}  // namespace rado::protocol
