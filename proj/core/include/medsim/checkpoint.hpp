#pragma once

#include <filesystem>
#include <iosfwd>

#include "medsim/classifier.hpp"

namespace medsim {

// Checkpoint layout:
//   8 bytes   magic "MEDSIMCK"
//   8 bytes   header length N, unsigned little-endian
//   N bytes   UTF-8 JSON header: format version, byte order, dtype,
//             encoder kind and hyperparameters, vocabulary, classifier
//             settings, and a tensor table (name, shape, offset, byte count)
//   payload   tensors as little-endian IEEE-754 float64, column-major
inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const PairClassifier& model, std::ostream& out);
void save_checkpoint(const PairClassifier& model,
                     const std::filesystem::path& path);

PairClassifier load_checkpoint(std::istream& in);
PairClassifier load_checkpoint(const std::filesystem::path& path);

}  // namespace medsim
