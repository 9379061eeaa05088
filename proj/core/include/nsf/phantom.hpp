#pragma once

#include <cstdint>

#include "nsf/generator.hpp"

namespace nsf {

/// Toy head built from ellipsoids, used for demos, tests and benchmarks.
struct PhantomOptions {
    Dims dims{48, 48, 48};
    double spacing = 1.0;
    std::uint64_t seed = 0;
    /// Perturb centres and radii per seed; off gives a left-right symmetric
    /// anatomy (apart from the lesion).
    bool jitter = true;
    double noise_std = 2.0;
};

/// Labels use the default brain schema ids; throws InvalidArgument if `schema`
/// lacks any of them.
TrainingPair make_phantom(const LabelSchema& schema, const PhantomOptions& options = {});

} // namespace nsf
