#pragma once

#include <functional>
#include <string>
#include <vector>

#include "core/image.hpp"
#include "core/nn.hpp"
#include "core/rng.hpp"
#include "core/tape.hpp"

namespace umic::test {

// Scratch directory under the build tree; recreated empty per call.
std::string temp_dir(const std::string& name);

Tensor random_tensor(std::vector<int64_t> shape, Rng& rng, double scale = 1.0);

// Synthetic toy images: smooth gradient background plus a few geometric
// shapes. Deterministic per seed. Caption text mirrors the drawn content.
struct ToyScene {
    ImageBuffer image;
    std::string concise;
    std::string moderate;
    std::string detailed;
};
ToyScene make_toy_scene(int h, int w, uint64_t seed);

// Writes n PNG images plus a caption sidecar (captions.json) into dir.
// Returns the list of image ids.
std::vector<std::string> write_toy_dataset(const std::string& dir, int n, int h,
                                           int w, uint64_t seed);

// Central finite-difference check of d(loss)/d(inputs) for a scalar-loss
// graph builder. Returns the max relative error over all checked elements.
double fd_check(
    const std::function<Var(Tape&, const std::vector<Var>&)>& build_loss,
    std::vector<Tensor> inputs, double h = 1e-5, int max_checks_per_input = 0);

double relative_err(double got, double want);

}  // namespace umic::test
