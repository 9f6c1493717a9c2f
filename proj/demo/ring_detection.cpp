// Locates a rim lesion with the rim transform and prints the strength map
// around the detected centre.

#include <cstdio>

#include "dirac/dirac.hpp"

int main() {
    dirac::LesionSpec spec;
    spec.kind = dirac::LesionKind::RimPositive;
    spec.center = {19.0, 13.0};
    spec.radius = 7.0;
    spec.noise_sigma = 0.05;
    spec.seed = 3;
    const auto image = dirac::generate_lesion<double>(spec, {36, 30}).patch;

    const auto result = dirac::datr_transform(image, dirac::DatrConfig{});
    const auto& vs = result.v_s;
    std::size_t bx = 0, by = 0;
    for (std::size_t i = 0; i < vs.dims()[0]; ++i)
        for (std::size_t j = 0; j < vs.dims()[1]; ++j)
            if (vs(0, i, j) > vs(0, bx, by)) bx = i, by = j;

    std::printf("lesion centre (%.0f, %.0f), v_s peak at (%zu, %zu)\n", spec.center[0], spec.center[1], bx, by);
    for (std::size_t i = bx - 3; i <= bx + 3; ++i) {
        for (std::size_t j = by - 3; j <= by + 3; ++j) std::printf("%8.2f", vs(0, i, j));
        std::printf("\n");
    }
}
