#include "ugcl/export.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ugcl {
namespace {

std::ofstream open_for_write(const std::filesystem::path& path, const RunTag& tag) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "# config_digest=" << tag.config_digest << " seed=" << tag.seed << '\n';
  return os;
}

void put(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  os << buf;
}

void finish(std::ofstream& os, const std::filesystem::path& path) {
  os.flush();
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void export_embeddings(const std::filesystem::path& path, const RunTag& tag, const FusionOut& fused,
                       const ReconState* views) {
  auto os = open_for_write(path, tag);
  for (std::size_t i = 0; i < fused.x_hat.rows(); ++i) {
    os << i;
    for (double v : fused.x_hat.row(i)) put(os << '\t', v);
    if (views) {
      for (double v : views->x_fr.row(i)) put(os << '\t', v);
      for (double v : views->z_sr.row(i)) put(os << '\t', v);
    }
    os << '\n';
  }
  finish(os, path);
}

nn::DenseMatrix read_node_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    std::size_t node = 0;
    if (!(fields >> node) || node != rows.size())
      throw std::runtime_error(path.string() + ": expected node " + std::to_string(rows.size()));
    std::vector<double> values;
    std::string token;
    while (fields >> token) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc() || ptr != token.data() + token.size())
        throw std::runtime_error(path.string() + ": malformed value '" + token + "'");
      values.push_back(v);
    }
    if (!rows.empty() && values.size() != rows.front().size())
      throw std::runtime_error(path.string() + ": ragged rows");
    rows.push_back(std::move(values));
  }
  nn::DenseMatrix out(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) out(i, j) = rows[i][j];
  return out;
}

void export_structure(const std::filesystem::path& path, const RunTag& tag, const nn::DenseMatrix& a_sr) {
  auto os = open_for_write(path, tag);
  for (std::size_t i = 0; i < a_sr.rows(); ++i) {
    for (std::size_t j = 0; j < a_sr.cols(); ++j) {
      if (a_sr(i, j) == 0.0) continue;
      os << i << '\t' << j << '\t';
      put(os, a_sr(i, j));
      os << '\n';
    }
  }
  finish(os, path);
}

void export_fusion_weights(const std::filesystem::path& path, const RunTag& tag, const nn::DenseMatrix& weights) {
  auto os = open_for_write(path, tag);
  for (std::size_t i = 0; i < weights.rows(); ++i) {
    os << i;
    for (double v : weights.row(i)) put(os << '\t', v);
    os << '\n';
  }
  finish(os, path);
}

void export_loss_log(const std::filesystem::path& path, const RunTag& tag, const std::vector<EpochLoss>& history) {
  auto os = open_for_write(path, tag);
  os << "epoch,L_F,L_S,total\n";
  for (const EpochLoss& e : history) {
    os << e.epoch;
    put(os << ',', e.feature);
    put(os << ',', e.structure);
    put(os << ',', e.total);
    os << '\n';
  }
  finish(os, path);
}

}  // namespace ugcl
