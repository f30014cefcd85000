#include "aeroseg/mesh_io.hpp"

#include "aeroseg/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

namespace aeroseg {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const auto start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::string_view strip_comment(std::string_view line) {
  const auto hash = line.find('#');
  return hash == std::string_view::npos ? line : line.substr(0, hash);
}

template <class T>
T parse_number(std::string_view tok, const std::string& source, std::size_t line) {
  T value{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError(source, line, "expected a number, got '" + std::string(tok) + "'");
  return value;
}

// Splits text into lines without copying; line numbers are 1-based.
template <class Fn>
void for_each_line(const std::string& text, Fn&& fn) {
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    ++line_no;
    fn(std::string_view(text).substr(pos, nl - pos), line_no);
    pos = nl + 1;
  }
}

Vec3 parse_point(const std::vector<std::string_view>& tok, const std::string& source,
                 std::size_t line) {
  if (tok.size() != 4)
    throw ParseError(source, line, "expected 3 coordinates after '" + std::string(tok[0]) + "'");
  return {parse_number<double>(tok[1], source, line), parse_number<double>(tok[2], source, line),
          parse_number<double>(tok[3], source, line)};
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

LabeledMesh parse_mesh(const std::string& text, const std::string& source) {
  LabeledMesh mesh;
  for_each_line(text, [&](std::string_view raw, std::size_t line) {
    const auto tok = split_ws(strip_comment(raw));
    if (tok.empty()) return;
    if (tok[0] == "v") {
      mesh.vertices.push_back(parse_point(tok, source, line));
    } else if (tok[0] == "f") {
      if (tok.size() != 4)
        throw ParseError(source, line,
                         "faces must be triangles (got " + std::to_string(tok.size() - 1) +
                             " indices)");
      Face f{};
      for (int k = 0; k < 3; ++k) f[k] = parse_number<std::uint32_t>(tok[k + 1], source, line);
      mesh.faces.push_back(f);
    } else {
      throw ParseError(source, line, "unknown record '" + std::string(tok[0]) + "'");
    }
  });
  mesh.validate();
  return mesh;
}

LabeledMesh load_mesh(const std::filesystem::path& path,
                      const std::optional<std::filesystem::path>& labels_path) {
  auto mesh = parse_mesh(read_file(path), path.string());
  if (labels_path) mesh.face_labels = load_labels(*labels_path, mesh.face_count());
  return mesh;
}

std::string format_mesh(const LabeledMesh& mesh) {
  std::string out;
  out.reserve(mesh.vertices.size() * 48 + mesh.faces.size() * 24);
  for (const auto& v : mesh.vertices) {
    out += "v ";
    out += format_double(v.x());
    out += ' ';
    out += format_double(v.y());
    out += ' ';
    out += format_double(v.z());
    out += '\n';
  }
  for (const auto& f : mesh.faces) {
    out += "f " + std::to_string(f[0]) + ' ' + std::to_string(f[1]) + ' ' + std::to_string(f[2]);
    out += '\n';
  }
  return out;
}

void save_mesh(const LabeledMesh& mesh, const std::filesystem::path& path) {
  write_file_atomic(path, format_mesh(mesh));
}

std::vector<PartLabel> parse_labels(const std::string& text, std::size_t face_count,
                                    const std::string& source) {
  std::vector<std::optional<PartLabel>> slots(face_count);
  std::size_t rows = 0;
  for_each_line(text, [&](std::string_view raw, std::size_t line) {
    auto body = strip_comment(raw);
    while (!body.empty() && (body.back() == '\r' || body.back() == ' ')) body.remove_suffix(1);
    if (body.empty()) return;
    const auto comma = body.find(',');
    if (comma == std::string_view::npos)
      throw ParseError(source, line, "expected 'face_index,label_id'");
    const auto first = body.substr(0, comma);
    const auto second = body.substr(comma + 1);
    if (rows == 0 && first == "face_index") return;  // header
    ++rows;
    const auto face = parse_number<std::size_t>(first, source, line);
    if (face >= face_count)
      throw ParseError(source, line,
                       "face index " + std::to_string(face) + " out of range (mesh has " +
                           std::to_string(face_count) + " faces)");
    if (slots[face]) throw ParseError(source, line, "duplicate face index " + std::to_string(face));
    try {
      slots[face] = part_label_from_id(parse_number<long>(second, source, line));
    } catch (const ValidationError& e) {
      throw ParseError(source, line, e.what());
    }
  });
  if (rows != face_count)
    throw ValidationError(source + ": label count " + std::to_string(rows) +
                          " does not match face count " + std::to_string(face_count));
  std::vector<PartLabel> out;
  out.reserve(face_count);
  for (const auto& s : slots) out.push_back(*s);
  return out;
}

std::vector<PartLabel> load_labels(const std::filesystem::path& path, std::size_t face_count) {
  return parse_labels(read_file(path), face_count, path.string());
}

std::string format_labels(const std::vector<PartLabel>& labels) {
  std::string out = "face_index,label_id\n";
  for (std::size_t i = 0; i < labels.size(); ++i)
    out += std::to_string(i) + ',' + std::to_string(index_of(labels[i])) + '\n';
  return out;
}

void save_labels(const std::vector<PartLabel>& labels, const std::filesystem::path& path) {
  write_file_atomic(path, format_labels(labels));
}

std::vector<SurfaceGrid> parse_surfaces(const std::string& text, const std::string& source) {
  std::vector<SurfaceGrid> grids;
  std::size_t expected = 0;
  std::size_t header_line = 0;
  auto close_current = [&]() {
    if (!grids.empty() && grids.back().points.size() != expected)
      throw ParseError(source, header_line,
                       "surface " + std::to_string(grids.back().surface_id) + " declares " +
                           std::to_string(expected) + " points but lists " +
                           std::to_string(grids.back().points.size()));
  };
  for_each_line(text, [&](std::string_view raw, std::size_t line) {
    const auto tok = split_ws(strip_comment(raw));
    if (tok.empty()) return;
    if (tok[0] == "surface") {
      close_current();
      if (tok.size() != 4 && tok.size() != 6)
        throw ParseError(source, line, "expected 'surface <id> <rows> <cols> [true_label <l>]'");
      SurfaceGrid g;
      g.surface_id = parse_number<int>(tok[1], source, line);
      g.rows = parse_number<std::size_t>(tok[2], source, line);
      g.cols = parse_number<std::size_t>(tok[3], source, line);
      if (g.rows == 0 || g.cols == 0) throw ParseError(source, line, "empty surface grid");
      if (tok.size() == 6) {
        if (tok[4] != "true_label")
          throw ParseError(source, line, "unexpected token '" + std::string(tok[4]) + "'");
        try {
          g.true_label = parse_part_label(tok[5]);
        } catch (const ValidationError& e) {
          throw ParseError(source, line, e.what());
        }
      }
      for (const auto& other : grids)
        if (other.surface_id == g.surface_id)
          throw ParseError(source, line, "duplicate surface id " + std::to_string(g.surface_id));
      expected = g.rows * g.cols;
      header_line = line;
      g.points.reserve(expected);
      grids.push_back(std::move(g));
    } else if (tok[0] == "p") {
      if (grids.empty()) throw ParseError(source, line, "point before any 'surface' header");
      if (grids.back().points.size() == expected)
        throw ParseError(source, line, "too many points for surface");
      grids.back().points.push_back(parse_point(tok, source, line));
    } else {
      throw ParseError(source, line, "unknown record '" + std::string(tok[0]) + "'");
    }
  });
  close_current();
  for (const auto& g : grids) g.validate();
  return grids;
}

std::vector<SurfaceGrid> load_surfaces(const std::filesystem::path& path) {
  return parse_surfaces(read_file(path), path.string());
}

std::string format_surfaces(const std::vector<SurfaceGrid>& grids) {
  std::string out;
  for (const auto& g : grids) {
    out += "surface " + std::to_string(g.surface_id) + ' ' + std::to_string(g.rows) + ' ' +
           std::to_string(g.cols);
    if (g.true_label) {
      out += " true_label ";
      out += to_string(*g.true_label);
    }
    out += '\n';
    for (const auto& p : g.points)
      out += "p " + format_double(p.x()) + ' ' + format_double(p.y()) + ' ' + format_double(p.z()) +
             '\n';
  }
  return out;
}

void save_surfaces(const std::vector<SurfaceGrid>& grids, const std::filesystem::path& path) {
  write_file_atomic(path, format_surfaces(grids));
}

}  // namespace aeroseg
