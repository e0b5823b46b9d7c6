#include "model/checkpoint.hpp"

#include <openssl/sha.h>

#include "core/bytes.hpp"

namespace umic {

const Tensor* CheckpointData::find(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return &t;
    return nullptr;
}

void save_checkpoint_file(const std::string& path, const CheckpointData& data) {
    require(data.magic.size() == 5, ErrKind::invalid_argument, "checkpoint magic size");
    ByteWriter w;
    w.str(data.magic);
    w.u8(1);  // version
    std::string manifest = data.manifest.dump();
    w.u32(uint32_t(manifest.size()));
    w.str(manifest);
    w.u32(uint32_t(data.tensors.size()));
    for (const auto& [name, t] : data.tensors) {
        require(name.size() <= 65535, ErrKind::invalid_argument, "tensor name too long");
        w.u16(uint16_t(name.size()));
        w.str(name);
        w.u8(uint8_t(t.rank()));
        for (int64_t d : t.shape) w.u32(uint32_t(d));
        w.raw(t.ptr(), size_t(t.numel()) * sizeof(double));
    }
    unsigned char digest[SHA256_DIGEST_LENGTH];
    SHA256(w.out.data(), w.out.size(), digest);
    w.raw(digest, sizeof digest);
    write_file_bytes(path, w.out);
}

CheckpointData load_checkpoint_file(const std::string& path,
                                    const std::string& expect_magic) {
    Bytes bytes = read_file_bytes(path);
    require(bytes.size() >= 5 + 1 + 32, ErrKind::format, "checkpoint truncated: " + path);

    unsigned char digest[SHA256_DIGEST_LENGTH];
    SHA256(bytes.data(), bytes.size() - 32, digest);
    require(std::memcmp(digest, bytes.data() + bytes.size() - 32, 32) == 0,
            ErrKind::format, "checkpoint hash mismatch (file tampered or corrupt): " + path);

    ByteReader r(bytes.data(), bytes.size() - 32);
    CheckpointData data;
    data.magic = r.str(5, "magic");
    require(data.magic == expect_magic, ErrKind::format,
            "checkpoint magic " + data.magic + " but expected " + expect_magic);
    uint8_t version = r.u8("version");
    require(version == 1, ErrKind::format, "unsupported checkpoint version");
    uint32_t mlen = r.u32("manifest length");
    std::string manifest = r.str(mlen, "manifest");
    try {
        data.manifest = nlohmann::json::parse(manifest);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrKind::format, std::string("checkpoint manifest corrupt: ") + e.what());
    }
    uint32_t count = r.u32("tensor count");
    for (uint32_t i = 0; i < count; ++i) {
        uint16_t nlen = r.u16("tensor name length");
        std::string name = r.str(nlen, "tensor name");
        uint8_t rank = r.u8("tensor rank");
        std::vector<int64_t> shape;
        for (uint8_t d = 0; d < rank; ++d) shape.push_back(r.u32("tensor dim"));
        Tensor t(shape);
        size_t nbytes = size_t(t.numel()) * sizeof(double);
        r.need(nbytes, "tensor data");
        std::memcpy(t.ptr(), r.p + r.pos, nbytes);
        r.pos += nbytes;
        data.tensors.emplace_back(std::move(name), std::move(t));
    }
    require(r.remaining() == 0, ErrKind::format, "checkpoint has trailing bytes");
    return data;
}

void store_params(const ParamStore& ps, CheckpointData& data, const std::string& prefix) {
    for (const Param& p : ps.all())
        data.tensors.emplace_back(prefix + p.name, p.value);
}

void load_params(ParamStore& ps, const CheckpointData& data, const std::string& prefix,
                 bool strict) {
    for (Param& p : ps.all()) {
        const Tensor* t = data.find(prefix + p.name);
        if (!t) {
            require(!strict, ErrKind::format,
                    "checkpoint missing parameter: " + prefix + p.name);
            continue;
        }
        require(t->shape == p.value.shape, ErrKind::format,
                "checkpoint parameter shape mismatch: " + prefix + p.name);
        p.value = *t;
    }
}

void store_adam_state(const ParamStore& ps, CheckpointData& data,
                      const std::string& prefix) {
    for (const Param& p : ps.all()) {
        if (!p.adam_init) continue;
        data.tensors.emplace_back(prefix + "adam.m/" + p.name, p.adam_m);
        data.tensors.emplace_back(prefix + "adam.v/" + p.name, p.adam_v);
    }
}

void load_adam_state(ParamStore& ps, const CheckpointData& data,
                     const std::string& prefix) {
    for (Param& p : ps.all()) {
        const Tensor* m = data.find(prefix + "adam.m/" + p.name);
        const Tensor* v = data.find(prefix + "adam.v/" + p.name);
        if (!m || !v) continue;
        require(m->shape == p.value.shape && v->shape == p.value.shape, ErrKind::format,
                "checkpoint adam state shape mismatch: " + p.name);
        p.adam_m = *m;
        p.adam_v = *v;
        p.adam_init = true;
    }
}

}  // namespace umic
