#pragma once

#include <vector>

#include "ptopofl/common.hpp"
#include "ptopofl/descriptor.hpp"

namespace ptopofl {

// Per-client descriptor signatures by round (round indices contiguous from 1).
struct SignatureHistory {
    std::vector<std::vector<TopoDescriptor>> per_client;

    explicit SignatureHistory(int clients = 0) : per_client(static_cast<std::size_t>(clients)) {}

    void record(int client, const TopoDescriptor& d) {
        per_client[static_cast<std::size_t>(client)].push_back(d);
    }

    int rounds(int client) const {
        return static_cast<int>(per_client[static_cast<std::size_t>(client)].size());
    }
};

// Mean descriptor displacement from the round-1 signature:
//   Delta_k = (1/R) sum_r ||phi_k^(r) - phi_k^(1)||
inline double topological_drift(const SignatureHistory& history, int client) {
    const auto& sig = history.per_client.at(static_cast<std::size_t>(client));
    if (sig.empty()) throw input_error("topological_drift: no recorded rounds");
    double s = 0.0;
    for (const auto& d : sig) s += descriptor_distance(d, sig.front());
    return s / static_cast<double>(sig.size());
}

// Same displacement on l2-normalized signatures, bounded by 2. This is the
// scale the re-clustering threshold is calibrated against.
inline double normalized_drift(const SignatureHistory& history, int client) {
    const auto& sig = history.per_client.at(static_cast<std::size_t>(client));
    if (sig.empty()) throw input_error("normalized_drift: no recorded rounds");
    const TopoDescriptor first = normalized(sig.front());
    double s = 0.0;
    for (const auto& d : sig) s += descriptor_distance(normalized(d), first);
    return s / static_cast<double>(sig.size());
}

} // namespace ptopofl
