#include "fourierfed/checkpoint.hpp"

#include "fourierfed/binary_io.hpp"

namespace fourierfed {

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t n) {
    std::uint64_t h = 14695981039346656037ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<std::uint8_t> encode_checkpoint(const NamedTensorMap& params, const std::string& spec_id) {
    std::vector<std::uint8_t> out;
    binio::put<std::uint32_t>(out, kCheckpointVersion);
    binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(spec_id.size()));
    binio::put_bytes(out, spec_id.data(), spec_id.size());
    binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
    for (const auto& [name, t] : params) {
        binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        binio::put_bytes(out, name.data(), name.size());
        binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
        for (auto d : t.shape) binio::put<std::uint64_t>(out, d);
        binio::put_bytes(out, t.data.data(), t.data.size() * sizeof(double));
    }
    binio::put<std::uint64_t>(out, fnv1a64(out.data(), out.size()));
    return out;
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < sizeof(std::uint32_t) + sizeof(std::uint64_t)) {
        throw Error(ErrorCode::kCorruptCheckpoint, "checkpoint is truncated");
    }
    const std::size_t payload = bytes.size() - sizeof(std::uint64_t);
    std::uint64_t stored;
    std::memcpy(&stored, bytes.data() + payload, sizeof stored);

    binio::Reader in(bytes.data(), payload, ErrorCode::kCorruptCheckpoint);
    const auto version = in.get<std::uint32_t>();
    if (fnv1a64(bytes.data(), payload) != stored) {
        throw Error(ErrorCode::kCorruptCheckpoint, "checkpoint checksum mismatch");
    }
    if (version != kCheckpointVersion) {
        throw Error(ErrorCode::kUnsupportedVersion, "checkpoint version " + std::to_string(version) + " is not supported");
    }

    Checkpoint ck;
    ck.spec_id = in.string(in.get<std::uint32_t>());
    const auto count = in.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string name = in.string(in.get<std::uint32_t>());
        const auto rank = in.get<std::uint32_t>();
        if (rank > 8) throw Error(ErrorCode::kCorruptCheckpoint, "implausible tensor rank");
        std::vector<std::size_t> shape(rank);
        std::size_t numel = 1;
        for (auto& d : shape) {
            d = static_cast<std::size_t>(in.get<std::uint64_t>());
            if (d != 0 && numel > in.remaining() / d) throw Error(ErrorCode::kCorruptCheckpoint, "tensor larger than file");
            numel *= d;
        }
        if (numel > in.remaining() / sizeof(double)) throw Error(ErrorCode::kCorruptCheckpoint, "tensor larger than file");
        std::vector<double> values(numel);
        in.read(values.data(), numel * sizeof(double));
        if (!ck.params.emplace(std::move(name), Tensor(std::move(shape), std::move(values))).second) {
            throw Error(ErrorCode::kCorruptCheckpoint, "duplicate tensor name");
        }
    }
    if (in.remaining() != 0) throw Error(ErrorCode::kCorruptCheckpoint, "trailing bytes after tensors");
    return ck;
}

void save_checkpoint(const NamedTensorMap& params, const std::string& path, const std::string& spec_id) {
    binio::write_file(path, encode_checkpoint(params, spec_id));
}

Checkpoint load_checkpoint(const std::string& path) { return decode_checkpoint(binio::read_file(path)); }

}  // namespace fourierfed
