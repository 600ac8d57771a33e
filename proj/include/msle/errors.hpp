#pragma once

#include <stdexcept>
#include <string>

namespace msle {

// Domain errors. Each maps to one class of precondition/invariant failure;
// callers that can recover catch the specific type.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidGrid : Error {
    using Error::Error;
};

// Bessel state left the positive half-line (only possible through bad input,
// the quadratic-root step itself cannot produce it).
struct NonpositiveState : Error {
    using Error::Error;
};

// kappa / kappa* passed in the wrong order.
struct ParamOrder : Error {
    using Error::Error;
};

// Initial values not strictly ordered.
struct InitOrder : Error {
    using Error::Error;
};

// Dyson scheme produced a non-ordered state even after local step halving.
struct OrderingViolation : Error {
    using Error::Error;
};

// A point required to stay alive was absorbed by the hull. Carries the
// absorption time; this is a domain fact, not a numerical failure.
struct SwallowedPoint : Error {
    SwallowedPoint(const std::string& what, double t) : Error(what), time(t) {}
    double time;
};

// A compact-grid evaluation point was swallowed, so the grid does not lie in
// the domain of the maps at horizon T.
struct GridIntersectsHull : Error {
    using Error::Error;
};

struct EmptySet : Error {
    using Error::Error;
};

// Koebe check called with |z-w| > r * dist(z, boundary).
struct DomainViolation : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

} // namespace msle
