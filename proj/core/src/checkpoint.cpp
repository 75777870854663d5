#include "medsim/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "medsim/attention_encoder.hpp"
#include "medsim/error.hpp"

namespace medsim {

namespace {

constexpr std::array<char, 8> kMagic = {'M', 'E', 'D', 'S', 'I', 'M', 'C', 'K'};

void put_u64(std::ostream& out, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(buf, 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8)) {
    throw ValidationError("checkpoint truncated");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void save_checkpoint(const PairClassifier& model, std::ostream& out) {
  nlohmann::ordered_json header;
  header["format"] = "medsim-checkpoint";
  header["version"] = kCheckpointVersion;
  header["byte_order"] = "little";
  header["dtype"] = "float64";
  header["layout"] = "column-major";
  header["encoder"] = {{"kind", model.encoder().kind()},
                       {"hyperparameters", model.encoder().hyperparameters()}};
  header["classifier"] = {{"threshold", model.threshold()},
                          {"max_tokens", model.max_tokens()}};
  header["vocabulary"] = model.encoder().vocabulary().tokens();

  auto tensors = nlohmann::ordered_json::array();
  std::uint64_t offset = 0;
  for (const auto* p : model.parameters()) {
    std::uint64_t bytes = static_cast<std::uint64_t>(p->value.size()) * 8;
    tensors.push_back({{"name", p->name},
                       {"shape", {p->value.rows(), p->value.cols()}},
                       {"offset", offset},
                       {"bytes", bytes}});
    offset += bytes;
  }
  header["tensors"] = std::move(tensors);

  std::string text = header.dump();
  out.write(kMagic.data(), kMagic.size());
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto* p : model.parameters()) {
    const double* data = p->value.data();
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      put_u64(out, std::bit_cast<std::uint64_t>(data[i]));
    }
  }
  if (!out) throw RuntimeFailure("failed writing checkpoint");
}

void save_checkpoint(const PairClassifier& model,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write '" + path.string() + "'");
  save_checkpoint(model, out);
}

PairClassifier load_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw ValidationError("not a medsim checkpoint (bad magic)");
  }
  std::uint64_t header_len = get_u64(in);
  if (header_len > (std::uint64_t{1} << 32)) {
    throw ValidationError("checkpoint header too large");
  }
  std::string text(header_len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(header_len))) {
    throw ValidationError("checkpoint truncated in header");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("checkpoint header: ") + e.what());
  }

  try {
    if (!header.contains("version")) {
      throw ValidationError("checkpoint header has no version");
    }
    int version = header.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw ValidationError("unsupported checkpoint version " +
                            std::to_string(version));
    }
    if (header.at("byte_order") != "little" || header.at("dtype") != "float64") {
      throw ValidationError("unsupported checkpoint byte order or dtype");
    }
    const auto& enc = header.at("encoder");
    if (enc.at("kind") != "attention") {
      throw ValidationError("unknown encoder kind " + enc.at("kind").dump());
    }
    auto vocab = Vocabulary::from_tokens(
        header.at("vocabulary").get<std::vector<std::string>>());
    PairClassifier model(
        AttentionEncoder::from_hyperparameters(std::move(vocab),
                                               enc.at("hyperparameters")),
        0);
    model.set_threshold(header.at("classifier").at("threshold").get<double>());
    model.set_max_tokens(header.at("classifier").at("max_tokens").get<std::size_t>());

    auto params = model.parameters();
    const auto& table = header.at("tensors");
    if (table.size() != params.size()) {
      throw ValidationError("checkpoint tensor count does not match encoder");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& entry = table[i];
      auto& value = params[i]->value;
      auto rows = entry.at("shape")[0].get<Eigen::Index>();
      auto cols = entry.at("shape")[1].get<Eigen::Index>();
      if (entry.at("name") != params[i]->name || rows != value.rows() ||
          cols != value.cols()) {
        throw ValidationError("checkpoint tensor '" +
                              entry.at("name").get<std::string>() +
                              "' does not match the encoder layout");
      }
      double* data = value.data();
      for (Eigen::Index k = 0; k < value.size(); ++k) {
        data[k] = std::bit_cast<double>(get_u64(in));
      }
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("checkpoint header: ") + e.what());
  }
}

PairClassifier load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint '" + path.string() + "'");
  return load_checkpoint(in);
}

}  // namespace medsim
