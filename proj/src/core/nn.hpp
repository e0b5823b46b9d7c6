#pragma once

#include <string>
#include <vector>

#include "core/rng.hpp"
#include "core/tape.hpp"

namespace umic {

// Named parameter registry for one model. Parameters are bound as tape
// leaves once per forward pass; layers reference them by index.
struct Param {
    std::string name;
    Tensor value;
    bool trainable = true;
    mutable Var var{};  // per-tape binding, scratch state
    // Adam state
    Tensor adam_m, adam_v;
    bool adam_init = false;
};

class ParamStore {
public:
    int add(const std::string& name, Tensor init, bool trainable = true);
    int find(const std::string& name) const;  // -1 when absent

    Param& at(int i) { return params_[size_t(i)]; }
    const Param& at(int i) const { return params_[size_t(i)]; }
    size_t count() const { return params_.size(); }
    std::vector<Param>& all() { return params_; }
    const std::vector<Param>& all() const { return params_; }

    void bind(Tape& t) const;
    Var var(int i) const { return params_[size_t(i)].var; }

    int64_t total_elements() const;
    int64_t trainable_elements() const;
    // sha256 over the values of params whose name starts with prefix
    std::string checksum(const std::string& prefix = "") const;
    void set_trainable_by_prefix(const std::string& prefix, bool trainable);

private:
    std::vector<Param> params_;
};

// fused normalization ops (custom backward)
Var group_norm(Tape& t, Var x, int groups, Var gamma, Var beta, double eps = 1e-5);
Var layer_norm(Tape& t, Var x, Var gamma, Var beta, double eps = 1e-5);

// ---- layers ----

struct LinearLayer {
    int w = -1, b = -1;
    void init(ParamStore& ps, const std::string& name, int in, int out, Rng& rng,
              bool zero = false, bool bias = true);
    Var fwd(Tape& t, const ParamStore& ps, Var x) const;
};

struct Conv2dLayer {
    int w = -1, b = -1;
    int stride = 1, pad = 1;
    void init(ParamStore& ps, const std::string& name, int cin, int cout, int k,
              int stride, int pad, Rng& rng, bool zero = false);
    Var fwd(Tape& t, const ParamStore& ps, Var x) const;
};

struct GroupNormLayer {
    int gamma = -1, beta = -1;
    int groups = 1;
    void init(ParamStore& ps, const std::string& name, int channels, int groups);
    Var fwd(Tape& t, const ParamStore& ps, Var x) const;
};

struct LayerNormLayer {
    int gamma = -1, beta = -1;
    void init(ParamStore& ps, const std::string& name, int dim);
    Var fwd(Tape& t, const ParamStore& ps, Var x) const;
};

// Multi-head attention: query [B,n,D] attends over memory [B,m,Dm]
// (memory width defaults to the query width).
struct AttentionLayer {
    LinearLayer q, k, v, out;
    int heads = 1, dim = 0;
    void init(ParamStore& ps, const std::string& name, int dim, int heads, Rng& rng,
              int mem_dim = -1);
    Var fwd(Tape& t, const ParamStore& ps, Var query, Var memory) const;
};

}  // namespace umic
