#include "dyst/scene/shard.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "dyst/io/png.hpp"
#include "dyst/scene/generator.hpp"

namespace dyst::scene {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kRecordMagic[8] = {'D', 'Y', 'S', 'T', 'R', 'E', 'C', '1'};

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void vec3(const Vec3& v) {
    f64(v.x());
    f64(v.y());
    f64(v.z());
  }
  void bytes(const std::vector<std::uint8_t>& b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
  void raw(const char* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }
  void camera(const CameraPose& c) {
    vec3(c.position);
    vec3(c.look_at);
    f64(c.fov_deg);
  }
  void object(const ObjectPose& o) {
    vec3(o.position);
    f64(o.yaw);
  }
  void image(const Image& img) { bytes(img.to_bytes()); }

  void save(const fs::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(buf_.data()), static_cast<std::streamsize>(buf_.size()));
    if (!out) throw IoError("failed writing '" + path.string() + "'");
  }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(const fs::path& path) : path_(path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open shard record '" + path.string() + "'");
    buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() {
    const auto* p = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    const auto* p = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  Vec3 vec3() {
    const double x = f64();
    const double y = f64();
    const double z = f64();
    return {x, y, z};
  }
  CameraPose camera() {
    CameraPose c;
    c.position = vec3();
    c.look_at = vec3();
    c.fov_deg = f64();
    return c;
  }
  ObjectPose object() {
    ObjectPose o;
    o.position = vec3();
    o.yaw = f64();
    return o;
  }
  Image image(int h, int w) { return Image::from_bytes(h, w, take(static_cast<std::size_t>(h) * w * 3)); }
  void expect_magic() {
    if (std::memcmp(take(8), kRecordMagic, 8) != 0) fail("bad record magic");
  }
  void expect_end() {
    if (pos_ != buf_.size()) fail("trailing bytes in record");
  }
  [[noreturn]] void fail(const std::string& what) const { throw IoError(what + " in '" + path_.string() + "'"); }

 private:
  const std::uint8_t* take(std::size_t n) {
    if (pos_ + n > buf_.size()) fail("truncated record");
    const auto* p = reinterpret_cast<const std::uint8_t*>(buf_.data()) + pos_;
    pos_ += n;
    return p;
  }
  fs::path path_;
  std::vector<char> buf_;
  std::size_t pos_ = 0;
};

json generator_to_json(const GeneratorConfig& g) {
  return {{"camera_noise", g.camera_noise},       {"random_radius", g.random_radius},
          {"scene_bounds", g.scene_bounds},       {"position_jitter", g.position_jitter},
          {"fov_deg", g.fov_deg},                 {"shift_extent", g.shift_extent},
          {"pan_extent", g.pan_extent},           {"zoom_far", g.zoom_far},
          {"zoom_near", g.zoom_near},             {"camera_distance_min", g.camera_distance_min},
          {"camera_distance_max", g.camera_distance_max}, {"supersample", g.supersample}};
}

GeneratorConfig generator_from_json(const json& j) {
  GeneratorConfig g;
  g.camera_noise = j.at("camera_noise").get<double>();
  g.random_radius = j.at("random_radius").get<double>();
  g.scene_bounds = j.at("scene_bounds").get<double>();
  g.position_jitter = j.at("position_jitter").get<double>();
  g.fov_deg = j.at("fov_deg").get<double>();
  g.shift_extent = j.at("shift_extent").get<double>();
  g.pan_extent = j.at("pan_extent").get<double>();
  g.zoom_far = j.at("zoom_far").get<double>();
  g.zoom_near = j.at("zoom_near").get<double>();
  g.camera_distance_min = j.at("camera_distance_min").get<double>();
  g.camera_distance_max = j.at("camera_distance_max").get<double>();
  g.supersample = j.at("supersample").get<int>();
  return g;
}

void write_manifest(const fs::path& root, const ShardManifest& m) {
  json j;
  j["format_version"] = m.format_version;
  j["kind"] = m.kind == ShardKind::grid ? "grid" : "clip";
  j["count"] = m.count;
  j["C"] = m.cameras;
  j["D"] = m.dynamics;
  j["T"] = m.length;
  j["H"] = m.height;
  j["W"] = m.width;
  j["seed"] = m.seed;
  j["generator"] = generator_to_json(m.generator);
  j["freeze_object"] = m.freeze_object;
  j["freeze_camera"] = m.freeze_camera;
  std::ofstream out(root / "manifest.json", std::ios::trunc);
  if (!out) throw IoError("cannot write manifest in '" + root.string() + "'");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing manifest in '" + root.string() + "'");
}

void prepare_root(const fs::path& root) {
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create shard directory '" + root.string() + "': " + ec.message());
}

void write_spec(Writer& w, const SceneSpec& s) {
  w.u64(s.seed);
  w.u8(static_cast<std::uint8_t>(s.object_shape));
  w.vec3(s.object_color);
  w.f64(s.object_scale);
  w.i32(s.background_id);
  w.u8(static_cast<std::uint8_t>(s.trajectory_kind));
  w.object(s.initial_object_pose);
}

SceneSpec read_spec(Reader& r) {
  SceneSpec s;
  s.seed = r.u64();
  const auto shape = r.u8();
  if (shape >= kShapeCount) r.fail("invalid object shape");
  s.object_shape = static_cast<ObjectShape>(shape);
  s.object_color = r.vec3();
  s.object_scale = r.f64();
  s.background_id = r.i32();
  const auto kind = r.u8();
  if (kind >= kTrajectoryKindCount) r.fail("invalid trajectory kind");
  s.trajectory_kind = static_cast<TrajectoryKind>(kind);
  s.initial_object_pose = r.object();
  return s;
}

}  // namespace

fs::path record_path(const fs::path& root, int index) { return root / ("scene_" + std::to_string(index) + ".bin"); }

ShardManifest write_shard(std::span<const ViewGrid> scenes, const fs::path& root, const ShardManifest& provenance) {
  if (scenes.empty()) throw InvalidInput("write_shard: no scenes to write");
  const ViewGrid& first = scenes.front();
  ShardManifest m = provenance;
  m.format_version = kShardFormatVersion;
  m.kind = ShardKind::grid;
  m.count = static_cast<int>(scenes.size());
  m.cameras = first.camera_count();
  m.dynamics = first.dynamics_count();
  m.length = 0;
  m.height = first.images.front().height;
  m.width = first.images.front().width;
  prepare_root(root);
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const ViewGrid& g = scenes[i];
    if (g.camera_count() != m.cameras || g.dynamics_count() != m.dynamics ||
        g.images.size() != static_cast<std::size_t>(m.cameras * m.dynamics)) {
      throw InvalidInput("write_shard: scenes disagree on grid shape");
    }
    Writer w;
    w.raw(kRecordMagic, 8);
    w.u32(kShardFormatVersion);
    w.u8(static_cast<std::uint8_t>(ShardKind::grid));
    write_spec(w, g.spec);
    w.u32(static_cast<std::uint32_t>(m.cameras));
    w.u32(static_cast<std::uint32_t>(m.dynamics));
    w.u32(static_cast<std::uint32_t>(m.height));
    w.u32(static_cast<std::uint32_t>(m.width));
    for (const auto& c : g.cameras) w.camera(c);
    for (const auto& o : g.dynamics) w.object(o);
    for (const auto& img : g.images) {
      if (img.height != m.height || img.width != m.width) throw InvalidInput("write_shard: mixed resolutions");
      w.image(img);
    }
    w.save(record_path(root, static_cast<int>(i)));
  }
  write_manifest(root, m);
  return m;
}

ShardManifest write_shard(std::span<const MonocularClip> clips, const fs::path& root, const ShardManifest& provenance) {
  if (clips.empty()) throw InvalidInput("write_shard: no clips to write");
  ShardManifest m = provenance;
  m.format_version = kShardFormatVersion;
  m.kind = ShardKind::clip;
  m.count = static_cast<int>(clips.size());
  m.cameras = m.dynamics = 0;
  m.length = clips.front().length();
  m.height = clips.front().frames.front().height;
  m.width = clips.front().frames.front().width;
  prepare_root(root);
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const MonocularClip& c = clips[i];
    if (c.length() != m.length) throw InvalidInput("write_shard: clips disagree on length");
    const bool has_gt = !c.gt_cameras.empty();
    Writer w;
    w.raw(kRecordMagic, 8);
    w.u32(kShardFormatVersion);
    w.u8(static_cast<std::uint8_t>(ShardKind::clip));
    w.u32(static_cast<std::uint32_t>(m.length));
    w.u32(static_cast<std::uint32_t>(m.height));
    w.u32(static_cast<std::uint32_t>(m.width));
    w.u8(has_gt ? 1 : 0);
    if (has_gt) {
      for (const auto& cam : c.gt_cameras) w.camera(cam);
      for (const auto& o : c.gt_dynamics) w.object(o);
    }
    for (const auto& img : c.frames) {
      if (img.height != m.height || img.width != m.width) throw InvalidInput("write_shard: mixed resolutions");
      w.image(img);
    }
    w.save(record_path(root, static_cast<int>(i)));
  }
  write_manifest(root, m);
  return m;
}

ShardManifest read_manifest(const fs::path& root) {
  const fs::path path = root / "manifest.json";
  std::ifstream in(path);
  if (!in) throw IoError("missing shard manifest '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("corrupt shard manifest '" + path.string() + "': " + e.what());
  }
  ShardManifest m;
  try {
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kShardFormatVersion) {
      throw VersionError("shard '" + root.string() + "' has format_version " + std::to_string(m.format_version) +
                         ", expected " + std::to_string(kShardFormatVersion));
    }
    const auto kind = j.at("kind").get<std::string>();
    if (kind != "grid" && kind != "clip") throw IoError("unknown shard kind '" + kind + "'");
    m.kind = kind == "grid" ? ShardKind::grid : ShardKind::clip;
    m.count = j.at("count").get<int>();
    m.cameras = j.at("C").get<int>();
    m.dynamics = j.at("D").get<int>();
    m.length = j.at("T").get<int>();
    m.height = j.at("H").get<int>();
    m.width = j.at("W").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.generator = generator_from_json(j.at("generator"));
    m.freeze_object = j.value("freeze_object", false);
    m.freeze_camera = j.value("freeze_camera", false);
  } catch (const json::exception& e) {
    throw IoError("corrupt shard manifest '" + path.string() + "': " + e.what());
  }
  return m;
}

Shard load_shard(const fs::path& root) {
  Shard shard;
  shard.manifest = read_manifest(root);
  const ShardManifest& m = shard.manifest;
  for (int i = 0; i < m.count; ++i) {
    Reader r(record_path(root, i));
    r.expect_magic();
    if (r.u32() != static_cast<std::uint32_t>(kShardFormatVersion)) {
      throw VersionError("record version mismatch in '" + record_path(root, i).string() + "'");
    }
    const auto kind = r.u8();
    if (kind != static_cast<std::uint8_t>(m.kind)) r.fail("record kind disagrees with manifest");
    if (m.kind == ShardKind::grid) {
      ViewGrid g;
      g.spec = read_spec(r);
      const int c = static_cast<int>(r.u32());
      const int d = static_cast<int>(r.u32());
      const int h = static_cast<int>(r.u32());
      const int w = static_cast<int>(r.u32());
      if (c != m.cameras || d != m.dynamics || h != m.height || w != m.width) {
        r.fail("record geometry disagrees with manifest");
      }
      for (int k = 0; k < c; ++k) g.cameras.push_back(r.camera());
      for (int k = 0; k < d; ++k) g.dynamics.push_back(r.object());
      for (int k = 0; k < c * d; ++k) g.images.push_back(r.image(h, w));
      r.expect_end();
      shard.grids.push_back(std::move(g));
    } else {
      MonocularClip clip;
      const int t = static_cast<int>(r.u32());
      const int h = static_cast<int>(r.u32());
      const int w = static_cast<int>(r.u32());
      if (t != m.length || h != m.height || w != m.width) r.fail("record geometry disagrees with manifest");
      if (r.u8() != 0) {
        for (int k = 0; k < t; ++k) clip.gt_cameras.push_back(r.camera());
        for (int k = 0; k < t; ++k) clip.gt_dynamics.push_back(r.object());
      }
      for (int k = 0; k < t; ++k) clip.frames.push_back(r.image(h, w));
      r.expect_end();
      shard.clips.push_back(std::move(clip));
    }
  }
  return shard;
}

Shard regenerate_shard(const ShardManifest& m, int workers) {
  Shard shard;
  shard.manifest = m;
  const Resolution res{m.height, m.width};
  if (m.kind == ShardKind::grid) {
    shard.grids = generate_grid_dataset(m.seed, m.count, m.cameras, m.dynamics, res, m.generator, workers);
  } else {
    shard.clips = generate_clip_dataset(m.seed, m.count, m.length, res, m.generator, workers,
                                        ClipOptions{m.freeze_object, m.freeze_camera});
  }
  return shard;
}

MonocularClip import_clip_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("clip directory '" + dir.string() + "' does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".png" || ext == ".ppm" || ext == ".PNG" || ext == ".PPM") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  MonocularClip clip;
  for (const auto& f : files) {
    clip.frames.push_back(io::read_image(f));
    if (clip.frames.back().height != clip.frames.front().height ||
        clip.frames.back().width != clip.frames.front().width) {
      throw IoError("frame '" + f.string() + "' has a different resolution");
    }
  }
  if (clip.length() < 3) throw IoError("clip directory '" + dir.string() + "' holds fewer than 3 frames");
  return clip;
}

}  // namespace dyst::scene
