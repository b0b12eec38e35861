#pragma once

// Capacity-equivocation regions of Gaussian MIMO wiretap channels:
// closed-form rate functionals over the matrix interval {0 <= K <= S},
// boundary tracing, KKT certificates, channel-enhancement constructions,
// and a brute-force oracle for small instances.

#include "wiretap/channel.hpp"
#include "wiretap/enhancement.hpp"
#include "wiretap/errors.hpp"
#include "wiretap/kkt.hpp"
#include "wiretap/linalg.hpp"
#include "wiretap/membership.hpp"
#include "wiretap/oracle.hpp"
#include "wiretap/rates.hpp"
#include "wiretap/sampling.hpp"
#include "wiretap/solver.hpp"

namespace wiretap {
inline constexpr const char* kVersion = "0.1.0";
}
