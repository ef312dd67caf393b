// Artifact file formats and hashing.
//
//   grid descriptor  json text {n, counts, h, topology, ordering:"lex"}
//   cochain file     one json header line + raw little-endian float64
//                    payload, length (k-cell count) * m^2, lexicographic
//                    cell order, row-major matrices
//   immersion file   json header line + float64 blocks g | II | Theta
//   manifest         json {config_hash, inputs, outputs, verdicts}
//
// All files are written atomically (temp + rename).  Hashes are FNV-1a 64
// over file bytes, printed as 16 hex digits.
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaugedec/cochain.hpp"
#include "gaugedec/immersion.hpp"

namespace gaugedec {

static_assert(std::endian::native == std::endian::little,
              "file payloads are little-endian; big-endian hosts need a swap pass");

using Json = nlohmann::ordered_json;

inline std::uint64_t fnv1a(const void* data, size_t len, std::uint64_t h = 0xcbf29ce484222325ull) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string hash_bytes(const std::string& bytes) {
  return hash_hex(fnv1a(bytes.data(), bytes.size()));
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string file_hash(const std::filesystem::path& path) {
  return hash_bytes(read_file(path));
}

inline void atomic_write(const std::filesystem::path& path, const std::string& bytes) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string grid_hash(const Grid& g) { return hash_bytes(g.descriptor_json()); }

inline void write_grid(const std::filesystem::path& path, const Grid& g) {
  atomic_write(path, g.descriptor_json() + "\n");
}

inline Grid read_grid(const std::filesystem::path& path) {
  Json j = Json::parse(read_file(path));
  std::array<int, 3> counts = {1, 1, 1};
  auto cj = j.at("counts");
  for (size_t a = 0; a < cj.size(); ++a) counts[a] = cj[a].get<int>();
  Topology topo = j.at("topology").get<std::string>() == "torus" ? Topology::torus : Topology::box;
  return Grid(j.at("n").get<int>(), counts, j.at("h").get<double>(), topo);
}

// --- cochain files -----------------------------------------------------------

inline void write_cochain(const std::filesystem::path& path, const Cochain& c) {
  Json header;
  header["grid_hash"] = grid_hash(*c.grid);
  header["k"] = c.degree;
  header["m"] = c.m();
  header["flavor"] = to_string(c.algebra.flavor());
  header["cells"] = c.cells();
  std::string bytes = header.dump() + "\n";
  size_t payload = static_cast<size_t>(c.values.size()) * sizeof(double);
  bytes.resize(bytes.size() + payload);
  std::memcpy(bytes.data() + bytes.size() - payload, c.values.data(), payload);
  atomic_write(path, bytes);
}

inline Cochain read_cochain(const std::filesystem::path& path, const Grid& g) {
  std::string bytes = read_file(path);
  size_t nl = bytes.find('\n');
  if (nl == std::string::npos) throw std::runtime_error("malformed cochain file " + path.string());
  Json header = Json::parse(bytes.substr(0, nl));
  if (header.at("grid_hash").get<std::string>() != grid_hash(g))
    throw std::runtime_error("cochain file " + path.string() +
                             " does not match the grid (descriptor hash mismatch)");
  int k = header.at("k").get<int>();
  int m = header.at("m").get<int>();
  LieAlgebra alg(m, flavor_from_string(header.at("flavor").get<std::string>()));
  Cochain c = zero_cochain(g, k, alg);
  size_t expect = static_cast<size_t>(c.values.size()) * sizeof(double);
  if (bytes.size() - nl - 1 != expect)
    throw std::runtime_error("cochain file " + path.string() + " has wrong payload length");
  std::memcpy(c.values.data(), bytes.data() + nl + 1, expect);
  return c;
}

// --- immersion data files ----------------------------------------------------

inline void write_immersion_data(const std::filesystem::path& path, const ImmersionData& d) {
  Json header;
  header["grid"] = Json::parse(d.grid->descriptor_json());
  header["codim"] = d.codim;
  std::vector<double> block;
  auto push = [&](const Mat& M) {
    for (int r = 0; r < M.rows(); ++r)
      for (int c = 0; c < M.cols(); ++c) block.push_back(M(r, c));
  };
  for (const Mat& m : d.metric) push(m);
  for (const auto& per_vertex : d.second_fundamental)
    for (const Mat& m : per_vertex) push(m);
  for (const auto& per_vertex : d.normal_connection)
    for (const Mat& m : per_vertex) push(m);
  std::string bytes = header.dump() + "\n";
  size_t payload = block.size() * sizeof(double);
  bytes.resize(bytes.size() + payload);
  std::memcpy(bytes.data() + bytes.size() - payload, block.data(), payload);
  atomic_write(path, bytes);
}

inline ImmersionData read_immersion_data(const std::filesystem::path& path) {
  std::string bytes = read_file(path);
  size_t nl = bytes.find('\n');
  if (nl == std::string::npos)
    throw std::runtime_error("malformed immersion file " + path.string());
  Json header = Json::parse(bytes.substr(0, nl));
  Json gj = header.at("grid");
  std::array<int, 3> counts = {1, 1, 1};
  for (size_t a = 0; a < gj.at("counts").size(); ++a) counts[a] = gj.at("counts")[a].get<int>();
  ImmersionData d;
  d.grid = std::make_shared<Grid>(gj.at("n").get<int>(), counts, gj.at("h").get<double>(),
                                  gj.at("topology").get<std::string>() == "torus"
                                      ? Topology::torus
                                      : Topology::box);
  d.codim = header.at("codim").get<int>();
  int nv = d.grid->num_cells(0);
  size_t expect = static_cast<size_t>(nv) * (4 + d.codim * 4 + 2 * d.codim * d.codim);
  const double* p = reinterpret_cast<const double*>(bytes.data() + nl + 1);
  if ((bytes.size() - nl - 1) != expect * sizeof(double))
    throw std::runtime_error("immersion file " + path.string() + " has wrong payload length");
  auto pull = [&](int rows, int cols) {
    Mat M(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) M(r, c) = *p++;
    return M;
  };
  d.metric.resize(nv);
  for (int i = 0; i < nv; ++i) d.metric[i] = pull(2, 2);
  d.second_fundamental.assign(nv, {});
  for (int i = 0; i < nv; ++i)
    for (int a = 0; a < d.codim; ++a) d.second_fundamental[i].push_back(pull(2, 2));
  d.normal_connection.assign(nv, {Mat(), Mat()});
  for (int i = 0; i < nv; ++i)
    for (int ax = 0; ax < 2; ++ax) d.normal_connection[i][ax] = pull(d.codim, d.codim);
  return d;
}

// --- manifest ----------------------------------------------------------------

struct Manifest {
  std::string config_hash;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, hash
  std::vector<std::tuple<std::string, std::string, std::string>> outputs;  // path, hash, kind
  Json verdicts = Json::object();

  void add_input(const std::filesystem::path& p) { inputs.emplace_back(p.string(), file_hash(p)); }
  // outputs are recorded relative to the manifest directory, so identical
  // runs into different directories produce byte-identical manifests
  void add_output(const std::filesystem::path& p, const std::string& kind) {
    outputs.emplace_back(p.filename().string(), file_hash(p), kind);
  }

  Json to_json() const {
    Json j;
    j["config_hash"] = config_hash;
    j["inputs"] = Json::array();
    for (auto& [p, h] : inputs) j["inputs"].push_back(Json{{"path", p}, {"hash", h}});
    j["outputs"] = Json::array();
    for (auto& [p, h, k] : outputs)
      j["outputs"].push_back(Json{{"path", p}, {"hash", h}, {"kind", k}});
    j["verdicts"] = verdicts;
    return j;
  }
};

inline void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  atomic_write(path, m.to_json().dump(2) + "\n");
}

}  // namespace gaugedec
