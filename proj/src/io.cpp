#include "trek/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace trek::io {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return in;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream stream(line);
  std::string field;
  while (std::getline(stream, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

void write_dataset_csv(const std::string& path, const FunctionalDataset& data) {
  auto out = open_out(path);
  out << "function_index,location,value\n";
  for (int i = 0; i < data.layout.blocks(); ++i) {
    for (int j = 0; j < data.layout.count(i); ++j) {
      out << (i + 1) << ',' << fmt(data.locations[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
          << ',' << fmt(data.values[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) << '\n';
    }
  }
}

FunctionalDataset read_dataset_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || split_csv(line) != std::vector<std::string>{"function_index", "location", "value"}) {
    throw std::runtime_error("dataset '" + path + "': expected header 'function_index,location,value'");
  }
  std::vector<std::vector<double>> locations;
  std::vector<std::vector<double>> values;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 3) {
      throw std::runtime_error("dataset '" + path + "' row " + std::to_string(row) + ": expected 3 columns");
    }
    const long index = std::stol(fields[0]);
    if (index < 1) throw std::runtime_error("dataset '" + path + "': function_index must be >= 1");
    const auto i = static_cast<std::size_t>(index - 1);
    if (i >= locations.size()) {
      locations.resize(i + 1);
      values.resize(i + 1);
    }
    locations[i].push_back(std::stod(fields[1]));
    values[i].push_back(std::stod(fields[2]));
  }
  for (std::size_t i = 0; i < locations.size(); ++i) {
    if (locations[i].empty()) {
      throw std::runtime_error("dataset '" + path + "': function " + std::to_string(i + 1) + " has no rows");
    }
  }
  return FunctionalDataset(std::move(locations), std::move(values));
}

void write_residuals_csv(const std::string& path, const SolveReport& report) {
  auto out = open_out(path);
  out << "iteration,delta\n";
  for (std::size_t k = 0; k < report.residual_trace.size(); ++k) {
    out << k << ',' << fmt(report.residual_trace[k]) << '\n';
  }
}

void write_surface_csv(const std::string& path, const std::vector<double>& grid,
                       const Eigen::MatrixXd& surface) {
  if (surface.rows() != static_cast<Eigen::Index>(grid.size()) || surface.rows() != surface.cols()) {
    throw std::invalid_argument("write_surface_csv: surface does not match grid");
  }
  auto out = open_out(path);
  out << "k1,k2,z1,z2,value\n";
  for (Eigen::Index k1 = 0; k1 < surface.rows(); ++k1) {
    for (Eigen::Index k2 = 0; k2 < surface.cols(); ++k2) {
      out << (k1 + 1) << ',' << (k2 + 1) << ',' << fmt(grid[static_cast<std::size_t>(k1)]) << ','
          << fmt(grid[static_cast<std::size_t>(k2)]) << ',' << fmt(surface(k1, k2)) << '\n';
    }
  }
}

void write_eigenvalues_csv(const std::string& path, const Eigen::VectorXd& eigenvalues) {
  auto out = open_out(path);
  out << "l,lambda\n";
  for (Eigen::Index l = 0; l < eigenvalues.size(); ++l) {
    out << (l + 1) << ',' << fmt(eigenvalues[l]) << '\n';
  }
}

void write_eigenfunctions_csv(const std::string& path, const std::vector<double>& grid,
                              const Eigen::MatrixXd& values) {
  if (values.rows() != static_cast<Eigen::Index>(grid.size())) {
    throw std::invalid_argument("write_eigenfunctions_csv: rows do not match grid");
  }
  auto out = open_out(path);
  out << "l,k,z,value\n";
  for (Eigen::Index l = 0; l < values.cols(); ++l) {
    for (Eigen::Index k = 0; k < values.rows(); ++k) {
      out << (l + 1) << ',' << (k + 1) << ',' << fmt(grid[static_cast<std::size_t>(k)]) << ','
          << fmt(values(k, l)) << '\n';
    }
  }
}

CovarianceFit FitArtifact::covariance_fit() const {
  CovarianceFit fit;
  fit.coefficients = coefficients;
  fit.ridge = eta;
  fit.report = report;
  fit.mode = fit_mode();
  return fit;
}

MeanFit FitArtifact::mean_fit() const {
  MeanFit fit;
  fit.coefficients = mean_coefficients;
  fit.ridge = nu;
  return fit;
}

void save_fit_json(const std::string& path, const FitArtifact& artifact) {
  nlohmann::json j;
  j["kernel"] = artifact.kernel;
  j["mode"] = artifact.mode;
  j["eta"] = artifact.eta;
  j["nu"] = artifact.nu;
  j["locations"] = artifact.locations;
  nlohmann::json blocks = nlohmann::json::array();
  for (int i = 0; i < artifact.coefficients.blocks(); ++i) {
    const auto& b = artifact.coefficients.block(i);
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < b.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(b.cols()));
      for (Eigen::Index c = 0; c < b.cols(); ++c) row[static_cast<std::size_t>(c)] = b(r, c);
      rows.push_back(row);
    }
    blocks.push_back(rows);
  }
  j["coefficients"] = blocks;
  if (artifact.mean_coefficients.size() > 0) {
    j["mean_coefficients"] =
        std::vector<double>(artifact.mean_coefficients.data(),
                            artifact.mean_coefficients.data() + artifact.mean_coefficients.size());
  }
  j["report"] = {{"iterations", artifact.report.iterations},
                 {"status", to_string(artifact.report.status)},
                 {"residual_trace", artifact.report.residual_trace}};
  if (!artifact.process.empty()) {
    j["process"] = artifact.process;
    j["noise"] = artifact.noise;
    j["seed"] = artifact.seed;
  }
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

FitArtifact load_fit_json(const std::string& path) {
  auto in = open_in(path);
  nlohmann::json j;
  in >> j;
  FitArtifact artifact;
  artifact.kernel = j.at("kernel").get<std::string>();
  artifact.mode = j.at("mode").get<std::string>();
  artifact.eta = j.at("eta").get<double>();
  artifact.nu = j.at("nu").get<double>();
  artifact.locations = j.at("locations").get<std::vector<std::vector<double>>>();

  std::vector<int> counts;
  counts.reserve(artifact.locations.size());
  for (const auto& block : artifact.locations) counts.push_back(static_cast<int>(block.size()));
  BlockDiagMatrix coefficients{BlockLayout(counts)};
  const auto& blocks = j.at("coefficients");
  if (static_cast<int>(blocks.size()) != coefficients.blocks()) {
    throw std::runtime_error("fit '" + path + "': coefficient blocks do not match locations");
  }
  for (int i = 0; i < coefficients.blocks(); ++i) {
    const auto rows = blocks[static_cast<std::size_t>(i)].get<std::vector<std::vector<double>>>();
    auto& b = coefficients.block(i);
    if (static_cast<Eigen::Index>(rows.size()) != b.rows()) {
      throw std::runtime_error("fit '" + path + "': block " + std::to_string(i) + " has wrong row count");
    }
    for (Eigen::Index r = 0; r < b.rows(); ++r) {
      if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)].size()) != b.cols()) {
        throw std::runtime_error("fit '" + path + "': block " + std::to_string(i) + " has ragged rows");
      }
      for (Eigen::Index c = 0; c < b.cols(); ++c) {
        b(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      }
    }
  }
  coefficients.set_symmetric(coefficients.max_asymmetry() == 0.0);
  artifact.coefficients = std::move(coefficients);

  if (j.contains("mean_coefficients")) {
    const auto mean = j.at("mean_coefficients").get<std::vector<double>>();
    artifact.mean_coefficients = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  }
  const auto& report = j.at("report");
  artifact.report.iterations = report.at("iterations").get<int>();
  artifact.report.status = solve_status_from_string(report.at("status").get<std::string>());
  artifact.report.residual_trace = report.at("residual_trace").get<std::vector<double>>();
  if (j.contains("process")) {
    artifact.process = j.at("process").get<std::string>();
    artifact.noise = j.value("noise", 0.0);
    artifact.seed = j.value("seed", std::uint64_t{0});
  }
  return artifact;
}

}  // namespace trek::io
