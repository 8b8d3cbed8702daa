#include "dyst/training/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

#include "dyst/io/config_file.hpp"

namespace dyst::training {

namespace {

constexpr char kMagic[8] = {'D', 'Y', 'S', 'T', 'C', 'K', 'P', 'T'};

using nlohmann::json;

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void write_floats(std::ostream& out, const Matrix<float>& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    std::uint32_t bits;
    const float f = m.data()[i];
    std::memcpy(&bits, &f, 4);
    unsigned char b[4];
    for (int k = 0; k < 4; ++k) b[k] = static_cast<unsigned char>(bits >> (8 * k));
    out.write(reinterpret_cast<const char*>(b), 4);
  }
}

void read_floats(std::istream& in, Matrix<float>& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t bits = 0;
    for (int k = 0; k < 4; ++k) bits |= static_cast<std::uint32_t>(b[k]) << (8 * k);
    std::memcpy(m.data() + i, &bits, 4);
  }
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  ModelConfig mc = ckpt.model_config;
  TrainConfig tc = ckpt.train_config;
  json header;
  header["format_version"] = kCheckpointFormatVersion;
  header["model"] = io::collect(io::fields(mc));
  header["train"] = io::collect(io::fields(tc));
  header["step"] = ckpt.step;
  header["synthetic_updates"] = ckpt.synthetic_updates;
  header["clip_updates"] = ckpt.clip_updates;
  header["wall_time"] = ckpt.wall_time;
  header["adam_updates"] = ckpt.adam_updates;
  header["has_adam_state"] = !ckpt.adam_first.empty();
  json tensors = json::array();
  for (const auto& p : ckpt.params) tensors.push_back({{"name", p.name}, {"rows", p.value.rows()}, {"cols", p.value.cols()}});
  header["tensors"] = tensors;
  const std::string text = header.dump();

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + tmp.string());
    out.write(kMagic, 8);
    write_u64(out, static_cast<std::uint64_t>(kCheckpointFormatVersion));
    write_u64(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& p : ckpt.params) write_floats(out, p.value);
    if (!ckpt.adam_first.empty()) {
      if (ckpt.adam_first.size() != static_cast<std::size_t>(ckpt.params.size()) ||
          ckpt.adam_second.size() != ckpt.adam_first.size()) {
        throw InvalidInput("save_checkpoint: optimizer state does not match parameters");
      }
      for (const auto& m : ckpt.adam_first) write_floats(out, m);
      for (const auto& m : ckpt.adam_second) write_floats(out, m);
    }
    out.flush();
    if (!out) throw IoError("write failed for checkpoint " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place at " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("checkpoint not found: " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) throw IoError("not a checkpoint: " + path.string());
  const auto version = read_u64(in);
  if (version != static_cast<std::uint64_t>(kCheckpointFormatVersion)) {
    throw VersionError("checkpoint " + path.string() + " has format version " + std::to_string(version));
  }
  const auto len = read_u64(in);
  if (!in || len > (1u << 30)) throw IoError("corrupt checkpoint header: " + path.string());
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw IoError("truncated checkpoint header: " + path.string());

  Checkpoint ckpt;
  try {
    const json header = json::parse(text);
    auto mf = io::fields(ckpt.model_config);
    io::apply(header.at("model").get<io::KeyValues>(), mf);
    auto tf = io::fields(ckpt.train_config);
    io::apply(header.at("train").get<io::KeyValues>(), tf);
    ckpt.step = header.at("step").get<long>();
    ckpt.synthetic_updates = header.at("synthetic_updates").get<long>();
    ckpt.clip_updates = header.at("clip_updates").get<long>();
    ckpt.wall_time = header.at("wall_time").get<double>();
    ckpt.adam_updates = header.at("adam_updates").get<long>();
    const bool has_adam = header.at("has_adam_state").get<bool>();
    for (const auto& t : header.at("tensors")) {
      Matrix<float> m(t.at("rows").get<Eigen::Index>(), t.at("cols").get<Eigen::Index>());
      read_floats(in, m);
      ckpt.params.add(t.at("name").get<std::string>(), std::move(m));
    }
    if (has_adam) {
      for (auto* moments : {&ckpt.adam_first, &ckpt.adam_second}) {
        for (const auto& p : ckpt.params) {
          Matrix<float> m(p.value.rows(), p.value.cols());
          read_floats(in, m);
          moments->push_back(std::move(m));
        }
      }
    }
  } catch (const json::exception& e) {
    throw IoError("corrupt checkpoint header in " + path.string() + ": " + e.what());
  } catch (const InvalidInput& e) {
    throw IoError("invalid checkpoint " + path.string() + ": " + e.what());
  }
  if (!in) throw IoError("truncated checkpoint data: " + path.string());
  in.peek();
  if (!in.eof()) throw IoError("trailing bytes in checkpoint: " + path.string());
  return ckpt;
}

}  // namespace dyst::training
