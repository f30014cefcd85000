#include "aeroseg/checkpoint.hpp"

#include "aeroseg/error.hpp"
#include "aeroseg/mesh_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <sstream>

namespace aeroseg::nn {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint IO assumes a little-endian host");

constexpr std::string_view kMagic = "AEROSEGC";
constexpr std::string_view kTextMagic = "aeroseg-checkpoint text";
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& source) : bytes_(bytes), source_(source) {}

  template <class T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string get_string(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void get_doubles(double* dst, std::size_t n) {
    need(n * sizeof(double));
    std::memcpy(dst, bytes_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw ParseError(source_, 0, "truncated checkpoint");
  }

  const std::string& bytes_;
  const std::string& source_;
  std::size_t pos_ = 0;
};

nlohmann::json header_json(const ModelConfig& config, const nlohmann::json& metadata) {
  return nlohmann::json{{"model", config}, {"metadata", metadata}};
}

std::string hex_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
  return std::string(buf, ptr);
}

std::string to_hex(std::uint64_t v) {
  char buf[17];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, 16);
  return std::string(buf, ptr);
}

void assign_tensor(Parameter& p, const std::string& name, std::uint64_t rows, std::uint64_t cols,
                   const std::string& source) {
  if (name != p.name)
    throw ValidationError(source + ": expected tensor '" + p.name + "', found '" + name + "'");
  if (rows != static_cast<std::uint64_t>(p.value.rows()) ||
      cols != static_cast<std::uint64_t>(p.value.cols()))
    throw ValidationError(source + ": tensor '" + name + "' has shape " + std::to_string(rows) +
                          "x" + std::to_string(cols) + ", model expects " +
                          std::to_string(p.value.rows()) + "x" + std::to_string(p.value.cols()));
}

LoadedCheckpoint from_header(const nlohmann::json& header, std::uint64_t hash,
                             CheckpointFormat format, const std::string& source) {
  ModelConfig config = header.at("model").get<ModelConfig>();
  if (config_hash(config) != hash)
    throw ValidationError(source + ": config hash does not match the stored configuration");
  return {SegmentationModel(config), header.value("metadata", nlohmann::json::object()), format};
}

LoadedCheckpoint read_binary(const std::string& bytes, const std::string& source) {
  Reader in(bytes, source);
  if (in.get_string(kMagic.size()) != kMagic) throw ParseError(source, 0, "bad magic");
  const auto version = in.get<std::uint32_t>();
  if (version != kVersion)
    throw ParseError(source, 0, "unsupported checkpoint version " + std::to_string(version));
  const auto hash = in.get<std::uint64_t>();
  const auto header_len = in.get<std::uint32_t>();
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(in.get_string(header_len));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source, 0, std::string("bad header: ") + e.what());
  }
  auto loaded = from_header(header, hash, CheckpointFormat::binary, source);
  auto params = loaded.model.parameters();
  const auto count = in.get<std::uint32_t>();
  if (count != params.size())
    throw ValidationError(source + ": checkpoint holds " + std::to_string(count) +
                          " tensors, model expects " + std::to_string(params.size()));
  for (auto* p : params) {
    const auto name = in.get_string(in.get<std::uint32_t>());
    const auto rows = in.get<std::uint64_t>();
    const auto cols = in.get<std::uint64_t>();
    assign_tensor(*p, name, rows, cols, source);
    in.get_doubles(p->value.data(), static_cast<std::size_t>(p->value.size()));
  }
  if (!in.done()) throw ParseError(source, 0, "trailing bytes after last tensor");
  return loaded;
}

LoadedCheckpoint read_text(const std::string& bytes, const std::string& source) {
  std::istringstream in(bytes);
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> std::string& {
    if (!std::getline(in, line)) throw ParseError(source, line_no, "unexpected end of file");
    ++line_no;
    return line;
  };
  auto expect_prefix = [&](std::string_view prefix) {
    if (next().rfind(prefix, 0) != 0)
      throw ParseError(source, line_no, "expected '" + std::string(prefix) + "'");
    return line.substr(prefix.size());
  };

  const auto version = expect_prefix(std::string(kTextMagic) + " ");
  if (version != std::to_string(kVersion))
    throw ParseError(source, line_no, "unsupported checkpoint version " + version);
  const auto hash_text = expect_prefix("config_hash ");
  std::uint64_t hash = 0;
  {
    auto [ptr, ec] = std::from_chars(hash_text.data(), hash_text.data() + hash_text.size(), hash, 16);
    if (ec != std::errc{}) throw ParseError(source, line_no, "bad config hash");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(expect_prefix("header "));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source, line_no, std::string("bad header: ") + e.what());
  }
  auto loaded = from_header(header, hash, CheckpointFormat::text, source);
  auto params = loaded.model.parameters();
  const auto count = std::stoul(expect_prefix("tensors "));
  if (count != params.size())
    throw ValidationError(source + ": checkpoint holds " + std::to_string(count) +
                          " tensors, model expects " + std::to_string(params.size()));
  for (auto* p : params) {
    std::istringstream head(expect_prefix("tensor "));
    std::string name;
    std::uint64_t rows = 0, cols = 0;
    if (!(head >> name >> rows >> cols)) throw ParseError(source, line_no, "bad tensor header");
    assign_tensor(*p, name, rows, cols, source);
    const std::string& data = next();
    const char* cur = data.data();
    const char* end = data.data() + data.size();
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      while (cur < end && *cur == ' ') ++cur;
      auto [ptr, ec] = std::from_chars(cur, end, p->value.data()[i], std::chars_format::hex);
      if (ec != std::errc{}) throw ParseError(source, line_no, "bad tensor value");
      cur = ptr;
    }
    while (cur < end && *cur == ' ') ++cur;
    if (cur != end) throw ParseError(source, line_no, "extra values in tensor '" + name + "'");
  }
  return loaded;
}

}  // namespace

CheckpointFormat parse_checkpoint_format(std::string_view name) {
  if (name == "binary") return CheckpointFormat::binary;
  if (name == "text") return CheckpointFormat::text;
  throw ValidationError("unknown checkpoint format '" + std::string(name) +
                        "' (expected binary or text)");
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t config_hash(const ModelConfig& config) {
  return fnv1a64(nlohmann::json(config).dump());
}

std::string serialize_checkpoint(SegmentationModel& model, CheckpointFormat format,
                                 const nlohmann::json& metadata) {
  const auto header = header_json(model.config(), metadata).dump();
  const auto hash = config_hash(model.config());
  const auto params = model.parameters();
  std::string out;
  if (format == CheckpointFormat::binary) {
    out.append(kMagic);
    put(out, kVersion);
    put(out, hash);
    put(out, static_cast<std::uint32_t>(header.size()));
    out += header;
    put(out, static_cast<std::uint32_t>(params.size()));
    for (auto* p : params) {
      put(out, static_cast<std::uint32_t>(p->name.size()));
      out += p->name;
      put(out, static_cast<std::uint64_t>(p->value.rows()));
      put(out, static_cast<std::uint64_t>(p->value.cols()));
      out.append(reinterpret_cast<const char*>(p->value.data()),
                 static_cast<std::size_t>(p->value.size()) * sizeof(double));
    }
    return out;
  }
  out += std::string(kTextMagic) + " " + std::to_string(kVersion) + "\n";
  out += "config_hash " + to_hex(hash) + "\n";
  out += "header " + header + "\n";
  out += "tensors " + std::to_string(params.size()) + "\n";
  for (auto* p : params) {
    out += "tensor " + p->name + " " + std::to_string(p->value.rows()) + " " +
           std::to_string(p->value.cols()) + "\n";
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      if (i) out += ' ';
      out += hex_double(p->value.data()[i]);
    }
    out += '\n';
  }
  return out;
}

void save_checkpoint(SegmentationModel& model, const std::filesystem::path& path,
                     CheckpointFormat format, const nlohmann::json& metadata) {
  write_file_atomic(path, serialize_checkpoint(model, format, metadata));
}

LoadedCheckpoint deserialize_checkpoint(const std::string& bytes, const std::string& source) {
  if (bytes.rfind(kMagic, 0) == 0) return read_binary(bytes, source);
  if (bytes.rfind(kTextMagic, 0) == 0) return read_text(bytes, source);
  throw ParseError(source, 0, "not an aeroseg checkpoint");
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(read_file(path), path.string());
}

}  // namespace aeroseg::nn
