#include "ugcl/graph/dataset_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ugcl::graph {
namespace {

namespace fs = std::filesystem;

class LineReader {
 public:
  explicit LineReader(const fs::path& path) : path_(path), in_(path) {
    if (!in_) throw DatasetError("cannot open " + path.string());
  }

  /// Next non-blank, non-comment line split into fields.
  bool next(std::vector<std::string_view>& fields) {
    while (std::getline(in_, line_)) {
      ++line_no_;
      fields.clear();
      std::string_view rest(line_);
      while (!rest.empty()) {
        const auto start = rest.find_first_not_of(" \t\r");
        if (start == std::string_view::npos) break;
        rest.remove_prefix(start);
        const auto end = rest.find_first_of(" \t\r");
        fields.push_back(rest.substr(0, end));
        rest.remove_prefix(end == std::string_view::npos ? rest.size() : end);
      }
      if (fields.empty() || fields.front().starts_with('#')) continue;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& reason) const {
    throw DatasetError(path_.filename().string() + ":" + std::to_string(line_no_) + ": " + reason);
  }

  template <typename T>
  T parse(std::string_view field, const char* what) const {
    T value{};
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) fail(std::string("malformed ") + what + " '" + std::string(field) + "'");
    return value;
  }

 private:
  fs::path path_;
  std::ifstream in_;
  std::string line_;
  std::size_t line_no_ = 0;
};

struct RowTable {
  std::vector<std::vector<double>> rows;
};

/// Reads "<node> v_0 ... v_{d-1}" lines; every node id appears exactly once.
RowTable read_row_file(const fs::path& path, std::optional<std::size_t> expected_n,
                       std::optional<std::size_t> expected_d) {
  LineReader reader(path);
  std::vector<std::string_view> fields;
  std::vector<std::pair<std::size_t, std::vector<double>>> entries;
  std::optional<std::size_t> width = expected_d;
  while (reader.next(fields)) {
    const auto node = reader.parse<std::size_t>(fields[0], "node id");
    if (!width) width = fields.size() - 1;
    if (fields.size() - 1 != *width)
      reader.fail("expected " + std::to_string(*width) + " values, found " + std::to_string(fields.size() - 1));
    if (expected_n && node >= *expected_n) reader.fail("node id " + std::to_string(node) + " out of range");
    std::vector<double> values(*width);
    for (std::size_t j = 0; j < *width; ++j) values[j] = reader.parse<double>(fields[j + 1], "value");
    entries.emplace_back(node, std::move(values));
  }
  const std::size_t n = expected_n.value_or(entries.size());
  RowTable table;
  table.rows.resize(n);
  std::vector<bool> seen(n, false);
  for (auto& [node, values] : entries) {
    if (node >= n) throw DatasetError(path.filename().string() + ": node id " + std::to_string(node) + " out of range");
    if (seen[node]) throw DatasetError(path.filename().string() + ": node " + std::to_string(node) + " listed twice");
    seen[node] = true;
    table.rows[node] = std::move(values);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!seen[i]) throw DatasetError(path.filename().string() + ": node " + std::to_string(i) + " missing");
  return table;
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DatasetError("cannot write " + path.string());
  return os;
}

}  // namespace

GraphDataset load_dataset(const fs::path& dir) {
  std::optional<std::size_t> meta_n;
  std::optional<std::size_t> meta_d;
  std::optional<int> meta_c;
  if (fs::exists(dir / "meta.json")) {
    std::ifstream in(dir / "meta.json");
    try {
      const auto meta = nlohmann::json::parse(in);
      if (meta.contains("n")) meta_n = meta.at("n").get<std::size_t>();
      if (meta.contains("d")) meta_d = meta.at("d").get<std::size_t>();
      if (meta.contains("num_classes")) meta_c = meta.at("num_classes").get<int>();
    } catch (const nlohmann::json::exception& e) {
      throw DatasetError("meta.json: " + std::string(e.what()));
    }
  }

  RowTable feats = read_row_file(dir / "features.tsv", meta_n, meta_d);
  GraphDataset ds;
  ds.n = feats.rows.size();
  ds.d = ds.n ? feats.rows[0].size() : meta_d.value_or(0);
  ds.features = nn::DenseMatrix(ds.n, ds.d);
  for (std::size_t i = 0; i < ds.n; ++i)
    for (std::size_t j = 0; j < ds.d; ++j) ds.features(i, j) = feats.rows[i][j];
  ds.feature_mask.assign(ds.n * ds.d, 1);

  if (fs::exists(dir / "mask.tsv")) {
    RowTable mask = read_row_file(dir / "mask.tsv", ds.n, ds.d);
    for (std::size_t i = 0; i < ds.n; ++i) {
      for (std::size_t j = 0; j < ds.d; ++j) {
        const double m = mask.rows[i][j];
        if (m != 0.0 && m != 1.0)
          throw DatasetError("mask.tsv: node " + std::to_string(i) + " has a non-0/1 entry");
        ds.feature_mask[i * ds.d + j] = m == 1.0 ? 1 : 0;
        if (m == 0.0) ds.features(i, j) = 0.0;
      }
    }
  }

  {
    LineReader reader(dir / "edges.tsv");
    std::vector<std::string_view> fields;
    std::set<Edge> edges;
    while (reader.next(fields)) {
      if (fields.size() != 2) reader.fail("expected 2 fields, found " + std::to_string(fields.size()));
      const auto u = reader.parse<NodeId>(fields[0], "node id");
      const auto v = reader.parse<NodeId>(fields[1], "node id");
      if (u >= ds.n || v >= ds.n) reader.fail("node id out of range (n = " + std::to_string(ds.n) + ")");
      if (u == v) reader.fail("self-loop on node " + std::to_string(u));
      if (!edges.insert(make_edge(u, v)).second)
        reader.fail("duplicate edge " + std::to_string(u) + "-" + std::to_string(v));
    }
    ds.edges.assign(edges.begin(), edges.end());
  }

  if (fs::exists(dir / "labels.tsv")) {
    LineReader reader(dir / "labels.tsv");
    std::vector<std::string_view> fields;
    ds.labels.assign(ds.n, -1);
    int max_class = -1;
    while (reader.next(fields)) {
      if (fields.size() != 2) reader.fail("expected 2 fields, found " + std::to_string(fields.size()));
      const auto node = reader.parse<std::size_t>(fields[0], "node id");
      const auto cls = reader.parse<int>(fields[1], "class");
      if (node >= ds.n) reader.fail("node id " + std::to_string(node) + " out of range");
      if (cls < 0) reader.fail("negative class id");
      if (ds.labels[node] != -1) reader.fail("node " + std::to_string(node) + " labeled twice");
      ds.labels[node] = cls;
      max_class = std::max(max_class, cls);
    }
    ds.num_classes = meta_c.value_or(max_class + 1);
  }

  if (meta_n && *meta_n != ds.n) throw DatasetError("meta.json: n disagrees with features.tsv");
  if (meta_d && *meta_d != ds.d) throw DatasetError("meta.json: d disagrees with features.tsv");
  ds.validate();
  return ds;
}

void write_dataset(const GraphDataset& ds, const fs::path& dir) {
  ds.validate();
  fs::create_directories(dir);
  {
    auto os = open_out(dir / "features.tsv");
    for (std::size_t i = 0; i < ds.n; ++i) {
      os << i;
      for (std::size_t j = 0; j < ds.d; ++j) os << '\t' << format_double(ds.features(i, j));
      os << '\n';
    }
  }
  {
    auto os = open_out(dir / "mask.tsv");
    for (std::size_t i = 0; i < ds.n; ++i) {
      os << i;
      for (std::size_t j = 0; j < ds.d; ++j) os << '\t' << (ds.observed(i, j) ? '1' : '0');
      os << '\n';
    }
  }
  {
    auto os = open_out(dir / "edges.tsv");
    for (const Edge& e : ds.edges) os << e.u << '\t' << e.v << '\n';
  }
  if (ds.has_labels()) {
    auto os = open_out(dir / "labels.tsv");
    for (std::size_t i = 0; i < ds.n; ++i)
      if (ds.labels[i] >= 0) os << i << '\t' << ds.labels[i] << '\n';
  } else if (fs::exists(dir / "labels.tsv")) {
    fs::remove(dir / "labels.tsv");
  }
  {
    nlohmann::ordered_json meta;
    meta["n"] = ds.n;
    meta["d"] = ds.d;
    meta["num_classes"] = ds.num_classes;
    meta["num_edges"] = ds.edges.size();
    auto os = open_out(dir / "meta.json");
    os << meta.dump(2) << '\n';
  }
}

}  // namespace ugcl::graph
