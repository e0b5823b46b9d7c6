#include "testutil.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "json.hpp"

namespace umic::test {

namespace fs = std::filesystem;

std::string temp_dir(const std::string& name) {
    fs::path p = fs::path("umic_test_tmp") / name;
    std::error_code ec;
    fs::remove_all(p, ec);
    fs::create_directories(p);
    return p.string();
}

Tensor random_tensor(std::vector<int64_t> shape, Rng& rng, double scale) {
    Tensor t(std::move(shape));
    rng.fill_gaussian(t.ptr(), size_t(t.numel()));
    t.scale_(scale);
    return t;
}

ToyScene make_toy_scene(int h, int w, uint64_t seed) {
    Rng rng(seed);
    ToyScene sc;
    sc.image = ImageBuffer(h, w);

    static const char* color_names[] = {"red", "green", "blue", "yellow", "violet"};
    static const double colors[][3] = {{0.85, 0.2, 0.15},
                                       {0.2, 0.75, 0.3},
                                       {0.2, 0.35, 0.85},
                                       {0.9, 0.85, 0.25},
                                       {0.65, 0.3, 0.8}};
    static const char* bg_names[] = {"dark", "bright", "warm", "cool"};
    static const double bgs[][3] = {
        {0.15, 0.15, 0.2}, {0.85, 0.85, 0.8}, {0.7, 0.5, 0.35}, {0.35, 0.55, 0.65}};

    int bg = int(rng.uniform_index(4));
    double gx = rng.uniform(-0.3, 0.3), gy = rng.uniform(-0.3, 0.3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                double v = bgs[bg][c] + gx * (double(x) / w - 0.5) +
                           gy * (double(y) / h - 0.5);
                sc.image.at(y, x, c) = std::clamp(v, 0.0, 1.0);
            }

    int nshapes = 1 + int(rng.uniform_index(3));
    std::ostringstream detail;
    const char* first_color = nullptr;
    const char* first_shape = nullptr;
    for (int s = 0; s < nshapes; ++s) {
        int ci = int(rng.uniform_index(5));
        bool circle = rng.uniform() < 0.5;
        int cx = int(rng.uniform(0.2, 0.8) * w);
        int cy = int(rng.uniform(0.2, 0.8) * h);
        int r = int(rng.uniform(0.08, 0.22) * std::min(h, w));
        if (!first_color) {
            first_color = color_names[ci];
            first_shape = circle ? "circle" : "square";
        }
        for (int y = std::max(0, cy - r); y < std::min(h, cy + r); ++y)
            for (int x = std::max(0, cx - r); x < std::min(w, cx + r); ++x) {
                bool inside = circle
                                  ? (double(y - cy) * (y - cy) + double(x - cx) * (x - cx)) <
                                        double(r) * r
                                  : true;
                if (inside)
                    for (int c = 0; c < 3; ++c) sc.image.at(y, x, c) = colors[ci][c];
            }
        detail << (s ? " and a " : "a ") << color_names[ci] << " "
               << (circle ? "circle" : "square") << " near x" << cx << " y" << cy;
    }

    std::ostringstream con, mod, det;
    con << "a " << first_color << " " << first_shape << " on a " << bg_names[bg]
        << " background";
    mod << con.str() << " with " << nshapes
        << (nshapes == 1 ? " shape drawn over it" : " shapes drawn over it");
    det << mod.str() << " showing " << detail.str();
    sc.concise = con.str();
    sc.moderate = mod.str();
    sc.detailed = det.str();
    return sc;
}

std::vector<std::string> write_toy_dataset(const std::string& dir, int n, int h,
                                           int w, uint64_t seed) {
    fs::create_directories(dir);
    nlohmann::json captions = nlohmann::json::array();
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) {
        ToyScene sc = make_toy_scene(h, w, seed + uint64_t(i) * 7919);
        char name[32];
        std::snprintf(name, sizeof name, "img%04d", i);
        write_png((fs::path(dir) / (std::string(name) + ".png")).string(), sc.image);
        captions.push_back({{"id", name},
                            {"concise", sc.concise},
                            {"moderate", sc.moderate},
                            {"detailed", sc.detailed}});
        ids.push_back(name);
    }
    write_file_text((fs::path(dir) / "captions.json").string(), captions.dump(1));
    return ids;
}

double relative_err(double got, double want) {
    double denom = std::max({1e-12, std::fabs(got), std::fabs(want)});
    return std::fabs(got - want) / denom;
}

double fd_check(const std::function<Var(Tape&, const std::vector<Var>&)>& build_loss,
                std::vector<Tensor> inputs, double h, int max_checks_per_input) {
    // analytic gradients
    Tape tape;
    std::vector<Var> vars;
    for (const Tensor& in : inputs) vars.push_back(tape.leaf(in, true));
    Var loss = build_loss(tape, vars);
    tape.backward(loss);
    std::vector<Tensor> grads;
    for (Var v : vars) grads.push_back(tape.grad(v));

    auto eval = [&](const std::vector<Tensor>& ins) {
        Tape t2(false);
        std::vector<Var> vs;
        for (const Tensor& in : ins) vs.push_back(t2.leaf(in, false));
        return t2.val(build_loss(t2, vs)).item();
    };

    double max_rel = 0.0;
    Rng pick(12345);
    for (size_t vi = 0; vi < inputs.size(); ++vi) {
        int64_t n = inputs[vi].numel();
        std::vector<int64_t> idxs;
        if (max_checks_per_input > 0 && n > max_checks_per_input) {
            for (int c = 0; c < max_checks_per_input; ++c)
                idxs.push_back(int64_t(pick.uniform_index(uint64_t(n))));
        } else {
            for (int64_t i = 0; i < n; ++i) idxs.push_back(i);
        }
        for (int64_t i : idxs) {
            double orig = inputs[vi].data[size_t(i)];
            double step = h * std::max(1.0, std::fabs(orig));
            inputs[vi].data[size_t(i)] = orig + step;
            double lp = eval(inputs);
            inputs[vi].data[size_t(i)] = orig - step;
            double lm = eval(inputs);
            inputs[vi].data[size_t(i)] = orig;
            double fd = (lp - lm) / (2.0 * step);
            double ad = grads[vi].data[size_t(i)];
            double denom = std::max({1e-6, std::fabs(fd), std::fabs(ad)});
            max_rel = std::max(max_rel, std::fabs(fd - ad) / denom);
        }
    }
    return max_rel;
}

}  // namespace umic::test
