// Copyright (C) 2026 the vattn authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "vattn/errors.hpp"

namespace vattn {

/// Which concentration result sizes the residual sample.
enum class BoundKind { Clt, Hoeffding };

/// Whether the (eps, delta) contract is enforced on the softmax
/// normalizer alone or on the full attention output.
enum class Relaxation { DenominatorOnly, Full };

/// Policy applied when the computed sample size falls under b_min.
enum class BudgetFloorRule { ClampToMin, None };

/// User contract for one verified attention evaluation.
///
/// Fractions are of the total token count n; sink_abs/local_abs override
/// the corresponding fractions with absolute token counts when set.
struct GuaranteeParams {
    double eps = 0.1;
    double delta = 0.1;
    double f_s = 0.0;  // sink fraction
    double f_l = 0.0;  // local-window fraction
    double f_t = 0.0;  // predicted top-k fraction
    double f_b = 0.0;  // base sampling rate
    std::optional<std::size_t> sink_abs;
    std::optional<std::size_t> local_abs;
    BoundKind bound_kind = BoundKind::Clt;
    Relaxation relaxation = Relaxation::DenominatorOnly;
    std::size_t b_min = 32;
    BudgetFloorRule b_floor_rule = BudgetFloorRule::ClampToMin;
    std::size_t base_min = 16;        // floor on the base-sample size
    double range_inflation = 1.5;     // Hoeffding range estimate = sample range * this
    std::size_t grid_points = 15;     // lattice resolution per axis for the combined budget
    bool reuse_base = false;          // merge the base sample into the residual draw

    void validate() const {
        if (!(eps > 0.0 && eps < 1.0)) throw InvalidSpec("eps must be strictly inside (0,1)");
        if (!(delta > 0.0 && delta < 1.0)) throw InvalidSpec("delta must be strictly inside (0,1)");
        for (double f : {f_s, f_l, f_t, f_b})
            if (!(f >= 0.0 && f < 1.0)) throw InvalidSpec("fractions must lie in [0,1)");
        if (f_s + f_l + f_t + f_b >= 1.0)
            throw InvalidSpec("f_s + f_l + f_t + f_b must be < 1");
        if (grid_points < 2) throw InvalidSpec("grid_points must be >= 2");
        if (range_inflation < 1.0) throw InvalidSpec("range_inflation must be >= 1");
        if (b_min == 0 || base_min == 0) throw InvalidSpec("b_min and base_min must be >= 1");
    }
};

inline const char* to_string(BoundKind k) {
    return k == BoundKind::Clt ? "clt" : "hoeffding";
}

inline const char* to_string(Relaxation r) {
    return r == Relaxation::DenominatorOnly ? "den" : "full";
}

}  // namespace vattn
