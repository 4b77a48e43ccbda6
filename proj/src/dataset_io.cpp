#include "fourierfed/dataset_io.hpp"

#include <fstream>
#include <iterator>

#include "fourierfed/binary_io.hpp"

namespace fourierfed {
namespace binio {

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw Error(ErrorCode::kIo, "read failed for '" + path + "'");
    return bytes;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path + "'");
}

}  // namespace binio

namespace {
constexpr char kMagic[4] = {'F', 'S', 'D', '1'};
}

Dataset SplitDataset::all() const {
    Dataset out{train.dim, train.classes, {}, {}};
    for (const auto* d : {&train, &val, &test}) {
        out.features.insert(out.features.end(), d->features.begin(), d->features.end());
        out.labels.insert(out.labels.end(), d->labels.begin(), d->labels.end());
    }
    return out;
}

std::vector<std::uint8_t> encode_dataset(const SplitDataset& data) {
    const std::size_t dim = data.train.dim;
    const std::size_t classes = data.train.classes;
    for (const auto* d : {&data.train, &data.val, &data.test}) {
        if (d->dim != dim || d->classes != classes) {
            throw Error(ErrorCode::kInvalidDataset, "splits disagree on dimension or class count");
        }
        if (d->features.size() != d->size() * dim) {
            throw Error(ErrorCode::kInvalidDataset, "feature buffer does not match sample count");
        }
    }
    std::vector<std::uint8_t> out;
    binio::put_bytes(out, kMagic, 4);
    binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
    binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(classes));
    for (const auto* d : {&data.train, &data.val, &data.test}) {
        binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(d->size()));
    }
    for (const auto* d : {&data.train, &data.val, &data.test}) {
        binio::put_bytes(out, d->features.data(), d->features.size() * sizeof(double));
    }
    for (const auto* d : {&data.train, &data.val, &data.test}) {
        for (int label : d->labels) binio::put<std::int32_t>(out, label);
    }
    return out;
}

SplitDataset decode_dataset(const std::vector<std::uint8_t>& bytes) {
    binio::Reader in(bytes.data(), bytes.size(), ErrorCode::kInvalidDataset);
    char magic[4];
    in.read(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw Error(ErrorCode::kInvalidDataset, "bad dataset magic");
    const auto dim = in.get<std::uint32_t>();
    const auto classes = in.get<std::uint32_t>();
    if (dim == 0 || classes == 0) throw Error(ErrorCode::kInvalidDataset, "dataset header has zero dimension");
    std::uint32_t counts[3];
    for (auto& c : counts) c = in.get<std::uint32_t>();
    const std::size_t total = std::size_t{counts[0]} + counts[1] + counts[2];
    if (in.remaining() != total * (dim * sizeof(double) + sizeof(std::int32_t))) {
        throw Error(ErrorCode::kInvalidDataset, "dataset body size does not match the header");
    }
    SplitDataset out;
    Dataset* splits[3] = {&out.train, &out.val, &out.test};
    for (int s = 0; s < 3; ++s) {
        splits[s]->dim = dim;
        splits[s]->classes = classes;
        splits[s]->features.resize(std::size_t{counts[s]} * dim);
        in.read(splits[s]->features.data(), splits[s]->features.size() * sizeof(double));
    }
    for (int s = 0; s < 3; ++s) {
        splits[s]->labels.resize(counts[s]);
        for (auto& l : splits[s]->labels) {
            l = in.get<std::int32_t>();
            if (l < 0 || static_cast<std::uint32_t>(l) >= classes) {
                throw Error(ErrorCode::kInvalidDataset, "label out of range");
            }
        }
    }
    return out;
}

void write_dataset_file(const std::string& path, const ClientData& client) {
    write_dataset_file(path, SplitDataset{client.train, client.val, client.test});
}

void write_dataset_file(const std::string& path, const SplitDataset& data) {
    binio::write_file(path, encode_dataset(data));
}

SplitDataset read_dataset_file(const std::string& path) { return decode_dataset(binio::read_file(path)); }

}  // namespace fourierfed
