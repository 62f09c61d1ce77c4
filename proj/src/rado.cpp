#include "radolearn/rado.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "radolearn/common.hpp"

namespace rado {

Eigen::VectorXd proj(const Eigen::VectorXd& v, const std::vector<int>& idx) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] < 0 || idx[i] >= v.size()) throw std::out_of_range("proj: index out of range");
        out(static_cast<Eigen::Index>(i)) = v(idx[i]);
    }
    return out;
}

Eigen::VectorXd lift(const Eigen::VectorXd& v, const std::vector<int>& from_idx, int dim) {
    if (static_cast<std::size_t>(v.size()) != from_idx.size())
        throw std::invalid_argument("lift: value/index length mismatch");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i < from_idx.size(); ++i) {
        if (from_idx[i] < 0 || from_idx[i] >= dim)
            throw std::out_of_range("lift: index out of range");
        out(from_idx[i]) = v(static_cast<Eigen::Index>(i));
    }
    return out;
}

namespace {

bool row_matches(const PeerView& view, Eigen::Index row, const Signature& sig) {
    if (view.y(row) != static_cast<double>(sig.klass)) return false;
    for (std::size_t t = 0; t < view.shared_pos.size(); ++t) {
        if (view.x(row, view.shared_pos[t]) != sig.values[t]) return false;
    }
    return true;
}

}  // namespace

PeerRado peer_rado(const PeerView& view, const Signature& sig) {
    if (sig.values.size() != view.shared_pos.size())
        throw std::invalid_argument("peer_rado: signature arity mismatch");

    std::vector<Eigen::Index> matches;
    for (Eigen::Index r = 0; r < view.rows(); ++r) {
        if (row_matches(view, r, sig)) matches.push_back(r);
    }

    PeerRado out;
    out.count = static_cast<std::int64_t>(matches.size());
    out.values.resize(static_cast<Eigen::Index>(view.own_pos.size()));
    std::vector<double> addends;
    for (std::size_t c = 0; c < view.own_pos.size(); ++c) {
        addends.clear();
        for (Eigen::Index r : matches) addends.push_back(view.y(r) * view.x(r, view.own_pos[c]));
        out.values(static_cast<Eigen::Index>(c)) = sorted_sum(addends);
    }
    return out;
}

BlockRado assemble_block(const Signature& sig, const std::vector<PeerPart>& parts, int dim,
                         const std::vector<int>& shared_idx) {
    const std::int64_t n_nonshared = dim - static_cast<std::int64_t>(shared_idx.size());
    if (n_nonshared <= 0) throw std::invalid_argument("assemble_block: no non-shared features");

    std::set<int> used(shared_idx.begin(), shared_idx.end());
    std::int64_t counter_total = 0;
    for (const PeerPart& part : parts) {
        if (static_cast<std::size_t>(part.values.size()) != part.own_idx.size())
            throw std::invalid_argument("assemble_block: part dimension mismatch");
        for (int k : part.own_idx) {
            if (!used.insert(k).second)
                throw std::invalid_argument("assemble_block: overlapping feature sets");
            counter_total += part.count;  // c_k += C_j for each owned feature
        }
    }

    BlockRado block;
    block.sig = sig;
    block.u = static_cast<double>(counter_total) / static_cast<double>(n_nonshared);
    Eigen::VectorXd sig_vec(static_cast<Eigen::Index>(sig.values.size()));
    for (std::size_t t = 0; t < sig.values.size(); ++t) {
        sig_vec(static_cast<Eigen::Index>(t)) = static_cast<double>(sig.klass) * sig.values[t];
    }
    block.v = block.u * lift(sig_vec, shared_idx, dim);
    for (const PeerPart& part : parts) {
        block.v += lift(part.values, part.own_idx, dim);
        block.counts.push_back(part.count);
    }
    return block;
}

std::vector<Signature> enumerate_signatures(const std::vector<PeerView>& peers) {
    std::set<Signature> seen;
    for (const PeerView& view : peers) {
        for (Eigen::Index r = 0; r < view.rows(); ++r) {
            Signature sig;
            sig.klass = view.y(r) > 0 ? +1 : -1;
            for (int pos : view.shared_pos) sig.values.push_back(view.x(r, pos));
            seen.insert(std::move(sig));
        }
    }
    return {seen.begin(), seen.end()};
}

namespace {

int full_dim(const std::vector<PeerView>& peers) {
    std::set<int> all;
    for (const PeerView& v : peers) all.insert(v.feature_idx.begin(), v.feature_idx.end());
    return *all.rbegin() + 1;
}

std::vector<int> shared_of(const PeerView& view) {
    std::vector<int> shared;
    for (int pos : view.shared_pos) shared.push_back(view.feature_idx[pos]);
    return shared;
}

}  // namespace

RadoSet craft_blocks(const std::vector<PeerView>& peers) {
    if (peers.size() < 2) throw std::invalid_argument("craft_blocks: need at least 2 peers");
    RadoSet set;
    set.shared_idx = shared_of(peers.front());
    set.dim = full_dim(peers);
    for (const Signature& sig : enumerate_signatures(peers)) {
        std::vector<PeerPart> parts;
        for (const PeerView& view : peers) {
            PeerRado r = peer_rado(view, sig);
            parts.push_back({view.own_idx, std::move(r.values), r.count});
        }
        BlockRado block = assemble_block(sig, parts, set.dim, set.shared_idx);
        if (std::any_of(block.counts.begin(), block.counts.end(),
                        [](std::int64_t c) { return c > 0; })) {
            set.blocks.push_back(std::move(block));
        }
    }
    return set;
}

std::vector<Eigen::VectorXd> enumerate_all_rados(const Dataset& data) {
    const Eigen::Index m = data.m();
    if (m > 20) throw std::invalid_argument("enumerate_all_rados: m > 20 would enumerate 2^m");
    std::vector<Eigen::VectorXd> out;
    out.reserve(std::size_t{1} << m);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
        Eigen::VectorXd pi = Eigen::VectorXd::Zero(data.d());
        for (Eigen::Index i = 0; i < m; ++i) {
            const double sigma = (mask >> i) & 1 ? 1.0 : -1.0;
            if (data.y(i) == sigma) pi += data.y(i) * data.x.row(i).transpose();
        }
        out.push_back(std::move(pi));
    }
    return out;
}

Eigen::VectorXd oracle_block_sum(const Dataset& data, const Signature& sig) {
    if (sig.values.size() != data.shared_idx.size())
        throw std::invalid_argument("oracle_block_sum: signature arity mismatch");

    std::vector<Eigen::Index> matches;
    for (Eigen::Index i = 0; i < data.m(); ++i) {
        if (data.y(i) != static_cast<double>(sig.klass)) continue;
        bool ok = true;
        for (std::size_t t = 0; t < sig.values.size(); ++t) {
            if (data.x(i, data.shared_idx[t]) != sig.values[t]) {
                ok = false;
                break;
            }
        }
        if (ok) matches.push_back(i);
    }

    Eigen::VectorXd out = Eigen::VectorXd::Zero(data.d());
    std::vector<double> addends;
    for (int k = 0; k < data.d(); ++k) {
        if (data.is_shared(k)) continue;
        addends.clear();
        for (Eigen::Index i : matches) addends.push_back(data.y(i) * data.x(i, k));
        out(k) = sorted_sum(addends);
    }
    // Matching rows all carry the identical representative on a shared
    // feature, so the coordinate sum is count * value exactly.
    for (std::size_t t = 0; t < sig.values.size(); ++t) {
        out(data.shared_idx[t]) = static_cast<double>(matches.size()) *
                                  (static_cast<double>(sig.klass) * sig.values[t]);
    }
    return out;
}

namespace {

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, ptr};
}

}  // namespace

std::string RadoSet::to_csv() const {
    std::ostringstream out;
    out << "dim," << dim << "\nshared";
    for (int k : shared_idx) out << "," << k;
    out << "\n";
    for (const BlockRado& b : blocks) {
        out << "block," << b.sig.klass << "," << format_double(b.u);
        for (double v : b.sig.values) out << "," << format_double(v);
        for (Eigen::Index i = 0; i < b.v.size(); ++i) out << "," << format_double(b.v(i));
        out << "\n";
    }
    return out.str();
}

RadoSet RadoSet::from_csv(const std::string& text) {
    RadoSet set;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');
        std::vector<std::string> rest;
        while (std::getline(row, cell, ',')) rest.push_back(cell);
        if (cell.empty() && rest.empty()) continue;
        auto as_double = [](const std::string& s) { return std::stod(s); };
        if (line.starts_with("dim,")) {
            set.dim = std::stoi(rest.at(0));
        } else if (line.starts_with("shared")) {
            for (const std::string& s : rest) set.shared_idx.push_back(std::stoi(s));
        } else if (line.starts_with("block,")) {
            BlockRado b;
            b.sig.klass = std::stoi(rest.at(0));
            b.u = as_double(rest.at(1));
            const std::size_t nshared = set.shared_idx.size();
            for (std::size_t t = 0; t < nshared; ++t) {
                b.sig.values.push_back(as_double(rest.at(2 + t)));
            }
            b.v.resize(set.dim);
            for (int i = 0; i < set.dim; ++i) {
                b.v(i) = as_double(rest.at(2 + nshared + static_cast<std::size_t>(i)));
            }
            set.blocks.push_back(std::move(b));
        }
    }
    return set;
}

nlohmann::json RadoSet::to_json() const {
    nlohmann::json j;
    j["dim"] = dim;
    j["shared_idx"] = shared_idx;
    j["blocks"] = nlohmann::json::array();
    for (const BlockRado& b : blocks) {
        j["blocks"].push_back({{"values", b.sig.values},
                               {"klass", b.sig.klass},
                               {"u", b.u},
                               {"counts", b.counts},
                               {"v", std::vector<double>(b.v.data(), b.v.data() + b.v.size())}});
    }
    return j;
}

RadoSet RadoSet::from_json(const nlohmann::json& j) {
    RadoSet set;
    set.dim = j.at("dim").get<int>();
    set.shared_idx = j.at("shared_idx").get<std::vector<int>>();
    for (const auto& e : j.at("blocks")) {
        BlockRado b;
        b.sig.values = e.at("values").get<std::vector<double>>();
        b.sig.klass = e.at("klass").get<int>();
        b.u = e.at("u").get<double>();
        b.counts = e.at("counts").get<std::vector<std::int64_t>>();
        const auto v = e.at("v").get<std::vector<double>>();
        b.v = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
        set.blocks.push_back(std::move(b));
    }
    return set;
}

}  // namespace rado
