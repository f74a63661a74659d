// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef DLBC_PHASE_HPP
#define DLBC_PHASE_HPP

#include <stdexcept>

namespace dlbc {

enum class Phase { p1, p2, p3 };

/// Fixed protocol-wide phase lengths; P2 hosts training and must dominate.
struct PhaseDurations {
    double p1 = 10.0;
    double p2 = 100.0;
    double p3 = 20.0;

    void validate() const {
        if (!(p1 > 0.0 && p2 > 0.0 && p3 > 0.0)) {
            throw std::invalid_argument("phases: durations must be positive");
        }
        if (!(p2 > p1 && p2 > p3)) {
            throw std::invalid_argument("phases: P2 must be the longest phase");
        }
    }

    double interval() const { return p1 + p2 + p3; }
};

/// Absolute boundaries of one block interval.
struct PhaseSchedule {
    double t_a = 0.0;       // P1 start
    double t_b = 0.0;       // P2 start
    double t_c = 0.0;       // P3 start (training/commit deadline)
    double t_next_a = 0.0;  // next block interval start

    static PhaseSchedule at(double start, const PhaseDurations& d) {
        d.validate();
        return PhaseSchedule{start, start + d.p1, start + d.p1 + d.p2, start + d.interval()};
    }
};

/// Interval membership over half-open ranges [t_a,t_b), [t_b,t_c), [t_c,t_next_a).
inline Phase phase_of(double now, const PhaseSchedule& s) {
    if (now >= s.t_a && now < s.t_b) return Phase::p1;
    if (now >= s.t_b && now < s.t_c) return Phase::p2;
    if (now >= s.t_c && now < s.t_next_a) return Phase::p3;
    throw std::domain_error("phase_of: time outside block interval");
}

} // namespace dlbc

#endif // DLBC_PHASE_HPP
