#pragma once

#include <string>
#include <vector>

#include "core/nn.hpp"
#include "model/model_config.hpp"

namespace umic {

// Learned text embedder: hashed-vocabulary token table, learned positions,
// and a small pre-LN transformer encoder, trained jointly with the rest of
// the compensator. Sequences are padded to a fixed token count so batches
// stack; pad positions attend like ordinary tokens.
class TextEncoder {
public:
    TextEncoder(const ModelConfig& cfg, ParamStore& ps, Rng& rng,
                const std::string& prefix = "text.");

    std::vector<int64_t> tokenize(const std::string& text) const;  // padded ids

    // texts[i] == nullptr selects the null-sentinel memory for that row.
    // null_param: ParamStore index of the sentinel embedding [D].
    Var encode_batch(Tape& t, const ParamStore& ps,
                     const std::vector<const std::string*>& texts,
                     int null_param) const;

private:
    struct Block {
        LayerNormLayer ln1, ln2;
        AttentionLayer attn;
        LinearLayer ff1, ff2;
    };
    ModelConfig cfg_;
    int table_ = -1;
    int pos_ = -1;
    std::vector<Block> blocks_;
    LayerNormLayer final_ln_;
};

uint64_t fnv1a64(const std::string& s);

}  // namespace umic
