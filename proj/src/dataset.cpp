#include "actcomp/dataset.hpp"
#include "actcomp/rng.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

namespace actcomp {

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

int GraphDataset::num_classes() const {
  if (labels.empty()) return 0;
  return *std::max_element(labels.begin(), labels.end()) + 1;
}

std::vector<std::size_t> GraphDataset::nodes_in(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < splits.size(); ++i)
    if (splits[i] == s) out.push_back(i);
  return out;
}

void GraphDataset::validate() const {
  const std::size_t n = labels.size();
  if (n == 0) throw std::invalid_argument("GraphDataset: no nodes");
  if (adjacency.n != n || features.rows() != n || splits.size() != n) {
    throw std::invalid_argument("GraphDataset: edges/features/labels/splits disagree on node count");
  }
  adjacency.validate();
  for (int y : labels)
    if (y < 0) throw std::invalid_argument("GraphDataset: negative label");
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

bool skippable(const std::string& line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first == std::string::npos || line[first] == '#';
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  return fields;
}

long parse_int(const std::string& s, const std::filesystem::path& file, std::size_t line) {
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0' || errno != 0) {
    throw std::invalid_argument(file.string() + ":" + std::to_string(line) + ": expected an integer, got '" + s + "'");
  }
  return v;
}

float parse_float(const std::string& s, const std::filesystem::path& file, std::size_t line) {
  char* end = nullptr;
  errno = 0;
  const float v = std::strtof(s.c_str(), &end);
  if (s.empty() || *end != '\0' || errno != 0) {
    throw std::invalid_argument(file.string() + ":" + std::to_string(line) + ": expected a real, got '" + s + "'");
  }
  return v;
}

}  // namespace

GraphDataset load_graph_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw std::runtime_error("dataset directory not found: " + dir.string());
  GraphDataset data;

  {
    const auto path = dir / "labels.csv";
    auto in = open_input(path);
    std::string line;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
      if (skippable(line)) continue;
      data.labels.push_back(static_cast<int>(parse_int(split_fields(line).at(0), path, no)));
    }
  }
  const std::size_t n = data.labels.size();

  {
    const auto path = dir / "splits.csv";
    auto in = open_input(path);
    std::string line;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
      if (skippable(line)) continue;
      const auto f = split_fields(line).at(0);
      if (f == "train") data.splits.push_back(Split::kTrain);
      else if (f == "val") data.splits.push_back(Split::kVal);
      else if (f == "test") data.splits.push_back(Split::kTest);
      else throw std::invalid_argument(path.string() + ":" + std::to_string(no) + ": unknown split '" + f + "'");
    }
  }

  {
    const auto path = dir / "features.csv";
    auto in = open_input(path);
    std::string line;
    std::vector<float> values;
    std::size_t cols = 0, rows = 0;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
      if (skippable(line)) continue;
      const auto fields = split_fields(line);
      if (rows == 0) cols = fields.size();
      if (fields.size() != cols) throw std::invalid_argument(path.string() + ":" + std::to_string(no) + ": ragged row");
      for (const auto& f : fields) values.push_back(parse_float(f, path, no));
      ++rows;
    }
    data.features = DenseMatrix::from_values(rows, cols, std::move(values));
  }

  {
    const auto path = dir / "edges.csv";
    auto in = open_input(path);
    std::string line;
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
      if (skippable(line)) continue;
      const auto fields = split_fields(line);
      if (fields.size() < 2) throw std::invalid_argument(path.string() + ":" + std::to_string(no) + ": need two columns");
      const long a = parse_int(fields[0], path, no);
      const long b = parse_int(fields[1], path, no);
      if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= n || static_cast<std::size_t>(b) >= n) {
        throw std::out_of_range(path.string() + ":" + std::to_string(no) + ": node index out of range");
      }
      seen.insert({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)});
      seen.insert({static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(a)});
    }
    std::vector<Edge> edges;
    edges.reserve(seen.size());
    for (const auto& [a, b] : seen) edges.push_back({a, b});
    data.adjacency = SparseAdjacency::from_edges(n, std::move(edges));
  }

  data.validate();
  return data;
}

void save_graph_dir(const GraphDataset& data, const std::filesystem::path& dir) {
  data.validate();
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("edges.csv");
    for (const auto& e : data.adjacency.edges)
      if (e.src < e.dst) out << e.src << ',' << e.dst << '\n';
  }
  {
    auto out = open("features.csv");
    char buf[32];
    for (std::size_t i = 0; i < data.features.rows(); ++i) {
      auto row = data.features.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(row[j]));
        out << (j ? "," : "") << buf;
      }
      out << '\n';
    }
  }
  {
    auto out = open("labels.csv");
    for (int y : data.labels) out << y << '\n';
  }
  {
    auto out = open("splits.csv");
    for (Split s : data.splits) out << to_string(s) << '\n';
  }
}

GraphDataset make_two_community_graph(const SyntheticGraphConfig& config, std::uint64_t seed) {
  if (config.nodes < 4 || config.features == 0) throw std::invalid_argument("synthetic graph: too small");
  SeededRng rng(seed);
  const std::size_t n = config.nodes;
  GraphDataset data;
  data.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) data.labels[i] = i < n / 2 ? 0 : 1;

  std::vector<Edge> edges;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) {
      const double p = data.labels[i] == data.labels[j] ? config.p_in : config.p_out;
      if (rng.uniform() < p) {
        edges.push_back({i, j});
        edges.push_back({j, i});
      }
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.src != b.src ? a.src < b.src : a.dst < b.dst;
  });
  data.adjacency = SparseAdjacency::from_edges(n, std::move(edges));

  // Each community gets its own random +-shift pattern.
  std::vector<std::vector<float>> means(2, std::vector<float>(config.features));
  for (auto& m : means)
    for (auto& v : m) v = static_cast<float>(rng.uniform() < 0.5 ? -config.feature_shift : config.feature_shift);
  data.features = DenseMatrix(n, config.features);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < config.features; ++j)
      data.features(i, j) = means[data.labels[i]][j] + static_cast<float>(rng.normal());

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  data.splits.resize(n);
  const std::size_t n_train = n * 6 / 10;
  const std::size_t n_val = n * 2 / 10;
  for (std::size_t k = 0; k < n; ++k) {
    data.splits[order[k]] = k < n_train ? Split::kTrain : (k < n_train + n_val ? Split::kVal : Split::kTest);
  }
  data.validate();
  return data;
}

}  // namespace actcomp
