#include "model/text_encoder.hpp"

#include <cctype>

namespace umic {

uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

TextEncoder::TextEncoder(const ModelConfig& cfg, ParamStore& ps, Rng& rng,
                         const std::string& prefix)
    : cfg_(cfg) {
    Tensor table({int64_t(cfg.text_vocab), int64_t(cfg.text_dim)});
    rng.fill_gaussian(table.ptr(), size_t(table.numel()));
    table.scale_(0.02);
    table_ = ps.add(prefix + "token_table", std::move(table));

    Tensor pos({1, int64_t(cfg.text_tokens), int64_t(cfg.text_dim)});
    rng.fill_gaussian(pos.ptr(), size_t(pos.numel()));
    pos.scale_(0.02);
    pos_ = ps.add(prefix + "positions", std::move(pos));

    blocks_.resize(size_t(cfg.text_layers));
    for (int i = 0; i < cfg.text_layers; ++i) {
        std::string bp = prefix + "block" + std::to_string(i);
        Block& b = blocks_[size_t(i)];
        b.ln1.init(ps, bp + ".ln1", cfg.text_dim);
        b.attn.init(ps, bp + ".attn", cfg.text_dim, cfg.text_heads, rng);
        b.ln2.init(ps, bp + ".ln2", cfg.text_dim);
        b.ff1.init(ps, bp + ".ff1", cfg.text_dim, cfg.text_dim * 2, rng);
        b.ff2.init(ps, bp + ".ff2", cfg.text_dim * 2, cfg.text_dim, rng);
    }
    final_ln_.init(ps, prefix + "final_ln", cfg.text_dim);
}

std::vector<int64_t> TextEncoder::tokenize(const std::string& text) const {
    std::vector<int64_t> ids;
    std::string cur;
    auto flush = [&]() {
        if (cur.empty()) return;
        // id 0 is PAD; hashed tokens land in [1, vocab)
        ids.push_back(1 + int64_t(fnv1a64(cur) % uint64_t(cfg_.text_vocab - 1)));
        cur.clear();
    };
    for (char raw : text) {
        unsigned char c = (unsigned char)raw;
        if (std::isalnum(c)) {
            cur.push_back(char(std::tolower(c)));
        } else if (c >= 0x80) {
            cur.push_back(raw);  // keep non-ascii bytes inside the token
        } else {
            flush();
        }
        if (int(ids.size()) >= cfg_.text_tokens) break;
    }
    flush();
    ids.resize(size_t(cfg_.text_tokens), 0);
    return ids;
}

Var TextEncoder::encode_batch(Tape& t, const ParamStore& ps,
                              const std::vector<const std::string*>& texts,
                              int null_param) const {
    int64_t B = int64_t(texts.size());
    int64_t L = cfg_.text_tokens, D = cfg_.text_dim;
    require(B >= 1, ErrKind::internal, "encode_batch: empty batch");

    std::vector<int64_t> all_ids;
    all_ids.reserve(size_t(B * L));
    std::vector<double> mask_data(size_t(B), 1.0);  // 1 = real text, 0 = null
    for (int64_t i = 0; i < B; ++i) {
        std::vector<int64_t> ids =
            texts[size_t(i)] ? tokenize(*texts[size_t(i)])
                             : std::vector<int64_t>(size_t(L), 0);
        if (!texts[size_t(i)]) mask_data[size_t(i)] = 0.0;
        all_ids.insert(all_ids.end(), ids.begin(), ids.end());
    }

    Var x = embedding(t, ps.var(table_), all_ids);      // [B*L, D]
    x = reshape(t, x, {B, L, D});
    x = add(t, x, ps.var(pos_));                        // positions broadcast on B
    for (const Block& b : blocks_) {
        Var h = b.ln1.fwd(t, ps, x);
        x = add(t, x, b.attn.fwd(t, ps, h, h));
        Var f = b.ln2.fwd(t, ps, x);
        f = b.ff2.fwd(t, ps, silu(t, b.ff1.fwd(t, ps, f)));
        x = add(t, x, f);
    }
    x = final_ln_.fwd(t, ps, x);

    // rows flagged null are replaced by the learned sentinel, broadcast over
    // all token positions; both paths stay differentiable
    bool any_null = false;
    for (double m : mask_data)
        if (m == 0.0) any_null = true;
    if (!any_null) return x;

    Var mask = t.constant(Tensor::from_vec({B, 1, 1}, mask_data));
    std::vector<double> inv(mask_data.size());
    for (size_t i = 0; i < inv.size(); ++i) inv[i] = 1.0 - mask_data[i];
    Var inv_mask = t.constant(Tensor::from_vec({B, 1, 1}, inv));
    Var sentinel = reshape(t, ps.var(null_param), {1, 1, D});
    Var ones = t.constant(Tensor::full({B, L, 1}, 1.0));
    Var null_mem = mul(t, mul(t, sentinel, ones), inv_mask);
    return add(t, mul(t, x, mask), null_mem);
}

}  // namespace umic
