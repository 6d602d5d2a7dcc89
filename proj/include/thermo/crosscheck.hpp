#ifndef THERMO_CROSSCHECK_HPP
#define THERMO_CROSSCHECK_HPP

#include <vector>

#include "oracle.hpp"
#include "transfer_operator.hpp"

// Glue that hands engine data to the oracles. The oracles themselves never
// include engine headers.
namespace thermo {

// Symbol graph with the sup weight of each successor pair.
inline oracle::FiniteGraph sup_weight_graph(const OperatorData& op, const Query& qy) {
    oracle::FiniteGraph g;
    g.n = static_cast<int>(op.symbols.size());
    g.out.resize(g.n);
    for (int k = 0; k < g.n; ++k) {
        const auto& sy = op.symbols[k];
        const auto& succ = op.symbols_from[sy.dst];
        for (std::size_t p = 0; p < succ.size(); ++p) {
            const Interval ph = sy.phi_bar_by_successor[p], ld = sy.log_deriv_by_successor[p];
            double phi = qy.q > 0 ? ph.hi : ph.lo;
            double lg = qy.b > 0 ? ld.hi : ld.lo;
            if (qy.q == 0) phi = 0;
            if (qy.b == 0) lg = 0;
            g.out[k].push_back({succ[p], -qy.q * phi - qy.b * lg - qy.s * sy.r});
        }
    }
    return g;
}

// State graph edges with the inner Birkhoff sum of each symbol.
inline std::vector<oracle::CycleEdge> cycle_edges(const OperatorData& op, bool for_max) {
    std::vector<oracle::CycleEdge> e;
    for (const auto& sy : op.symbols)
        e.push_back({sy.src, sy.dst, for_max ? sy.phi_bar_bracket.lo : sy.phi_bar_bracket.hi, static_cast<double>(sy.r)});
    return e;
}

}  // namespace thermo

#endif
