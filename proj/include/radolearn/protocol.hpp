#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <vector>

#include "radolearn/rado.hpp"

namespace rado::protocol {

// Wire records for one crafting round. The simulator passes these in-process;
// the schema is what a networked transport would serialize.
struct PartRequest {
    Signature sig;
    int peer_id = 0;
};

struct PartReply {
    int peer_id = 0;
    Eigen::VectorXd values;  // peer rado over its own features
    std::int64_t count = 0;  // C_j
};

struct PeerTraffic {
    std::int64_t messages = 0;
    std::int64_t scalars = 0;
};

/// Crafting-session traffic meter. Replies carry (d_j - dim(J)) rado scalars
/// plus the match count; requests are metered as messages only. Increments
/// are serialized so concurrent crafting rounds account correctly.
class CommLedger {
public:
    CommLedger() = default;
    explicit CommLedger(std::size_t peers) : per_peer_(peers) {}

    CommLedger(const CommLedger& o) { *this = o; }
    CommLedger& operator=(const CommLedger& o) {
        if (this != &o) {
            std::scoped_lock lock(o.mu_);
            scalars_sent_ = o.scalars_sent_;
            messages_sent_ = o.messages_sent_;
            per_peer_ = o.per_peer_;
        }
        return *this;
    }

    void record_request(int peer_id) {
        std::scoped_lock lock(mu_);
        ++messages_sent_;
        ++per_peer_.at(static_cast<std::size_t>(peer_id)).messages;
    }

    void record_reply(int peer_id, std::int64_t scalar_count) {
        std::scoped_lock lock(mu_);
        ++messages_sent_;
        scalars_sent_ += scalar_count;
        PeerTraffic& t = per_peer_.at(static_cast<std::size_t>(peer_id));
        ++t.messages;
        t.scalars += scalar_count;
    }

    std::int64_t scalars_sent() const {
        std::scoped_lock lock(mu_);
        return scalars_sent_;
    }
    std::int64_t messages_sent() const {
        std::scoped_lock lock(mu_);
        return messages_sent_;
    }
    std::vector<PeerTraffic> per_peer() const {
        std::scoped_lock lock(mu_);
        return per_peer_;
    }

private:
    mutable std::mutex mu_;
    std::int64_t scalars_sent_ = 0;
    std::int64_t messages_sent_ = 0;
    std::vector<PeerTraffic> per_peer_;
};

using TraceHook = std::function<void(const PartRequest&, const PartReply&)>;

struct CraftResult {
    RadoSet rados;
    CommLedger ledger;
};

/// Coordinator loop: for every observed (signature, class) pair, broadcast a
/// part request to all peers, fold the lifted replies and the counter, and
/// append the assembled block. Output is bit-identical to craft_blocks.
CraftResult radocraft(const std::vector<PeerView>& peers, const BinningRule& rule,
                      const TraceHook& trace = nullptr);

}  // namespace rado::protocol
