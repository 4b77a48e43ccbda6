#pragma once

#include <string>

#include "fourierfed/data_synth.hpp"
#include "fourierfed/dataset.hpp"

namespace fourierfed {

// "FSD1" file layout (little-endian):
//   char[4] magic "FSD1"
//   u32 D, u32 classes, u32 n_train, u32 n_val, u32 n_test
//   f64 features[(n_train + n_val + n_test) * D]   train rows, then val, then test
//   i32 labels[n_train + n_val + n_test]            same order
struct SplitDataset {
    Dataset train;
    Dataset val;
    Dataset test;

    Dataset all() const;
};

std::vector<std::uint8_t> encode_dataset(const SplitDataset& data);
SplitDataset decode_dataset(const std::vector<std::uint8_t>& bytes);

void write_dataset_file(const std::string& path, const ClientData& client);
void write_dataset_file(const std::string& path, const SplitDataset& data);
SplitDataset read_dataset_file(const std::string& path);

}  // namespace fourierfed
