// Simulation data-generating processes. A DGP is a list of components
// (Gaussian, multivariate t, independent exponential product, uniform box)
// over the leading "active" variables, padded with independent filler
// variables. Components are sized either exactly or multinomially. Built-in
// DGPs 1-4 cover: three well-separated Gaussian clusters in two of ten
// dimensions; the same plus one gross outlier; heavy-tailed t3 clusters in
// two of twenty dimensions; and a mix of shapes with true noise points.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "otrimle/rng.hpp"
#include "otrimle/types.hpp"

namespace otrimle {

struct LabeledDataset {
  DataMatrix data;
  std::vector<int> labels;  // 0 = noise, 1..trueG = cluster
  int trueG = 0;
  std::string dgpId;
  std::uint64_t seed = 0;
};

struct DgpComponent {
  std::string family;  // gaussian | t | exponential | uniform
  int label = 0;
  double prob = 0.0;  // multinomial sizing; exclusive with size
  int size = 0;       // exact sizing
  Eigen::VectorXd mean;    // gaussian / t location
  Eigen::MatrixXd cov;     // gaussian covariance or t scatter
  double df = 0.0;         // t degrees of freedom
  Eigen::VectorXd origin;  // exponential shift
  Eigen::VectorXd rate;    // exponential rates per variable
  Eigen::VectorXd center;  // uniform box center
  double range = 0.0;      // uniform box edge length
};

struct FillerSpec {
  std::string family;  // gaussian | t
  double df = 0.0;
};

struct DgpSpec {
  std::string name;
  int n = 0;
  int p = 0;
  int activeDims = 0;
  int trueG = 0;
  std::vector<DgpComponent> components;
  std::vector<FillerSpec> fillers;  // p - activeDims entries
};

namespace detail {

inline void check_dgp_spec(const DgpSpec& spec) {
  if (spec.n < 1 || spec.p < 1 || spec.activeDims < 1 || spec.activeDims > spec.p)
    throw ConfigError("dgp spec dimensions are invalid");
  if (static_cast<int>(spec.fillers.size()) != spec.p - spec.activeDims)
    throw ConfigError("dgp spec needs one filler per non-active variable");
  if (spec.components.empty()) throw ConfigError("dgp spec has no components");
  bool sized = spec.components.front().size > 0;
  int totalSize = 0;
  double totalProb = 0.0;
  for (const auto& comp : spec.components) {
    if ((comp.size > 0) != sized)
      throw ConfigError("dgp components must be either all sized or all probabilistic");
    totalSize += comp.size;
    totalProb += comp.prob;
  }
  if (sized && totalSize != spec.n)
    throw ConfigError("dgp component sizes must sum to n");
  if (!sized && std::abs(totalProb - 1.0) > 1e-9)
    throw ConfigError("dgp component probabilities must sum to 1");
}

inline Eigen::VectorXd draw_active(const DgpComponent& comp, int dims, Rng& rng) {
  Eigen::VectorXd x(dims);
  if (comp.family == "gaussian" || comp.family == "t") {
    Eigen::LLT<Eigen::MatrixXd> llt(comp.cov);
    if (llt.info() != Eigen::Success)
      throw ConfigError("dgp component covariance is not positive definite");
    Eigen::VectorXd z(dims);
    for (int j = 0; j < dims; ++j) z[j] = rng.normal();
    x = comp.mean + llt.matrixL() * z;
    if (comp.family == "t") {
      const double w = std::sqrt(comp.df / rng.chi_squared(comp.df));
      x = comp.mean + (x - comp.mean) * w;
    }
  } else if (comp.family == "exponential") {
    for (int j = 0; j < dims; ++j) x[j] = comp.origin[j] + rng.exponential(comp.rate[j]);
  } else if (comp.family == "uniform") {
    for (int j = 0; j < dims; ++j)
      x[j] = comp.center[j] + comp.range * (rng.uniform() - 0.5);
  } else {
    throw ConfigError("unknown dgp component family: " + comp.family);
  }
  return x;
}

inline double draw_filler(const FillerSpec& filler, Rng& rng) {
  if (filler.family == "gaussian") return rng.normal();
  if (filler.family == "t") return rng.student_t(filler.df);
  throw ConfigError("unknown dgp filler family: " + filler.family);
}

}  // namespace detail

inline LabeledDataset generate(const DgpSpec& spec, std::uint64_t seed) {
  detail::check_dgp_spec(spec);
  Rng rng(derive_seed(seed, 0xd97u));
  LabeledDataset out;
  out.data.resize(spec.n, spec.p);
  out.labels.resize(static_cast<std::size_t>(spec.n));
  out.trueG = spec.trueG;
  out.dgpId = spec.name;
  out.seed = seed;

  const bool sized = spec.components.front().size > 0;
  std::vector<int> assignment(static_cast<std::size_t>(spec.n));
  if (sized) {
    int row = 0;
    for (std::size_t c = 0; c < spec.components.size(); ++c)
      for (int k = 0; k < spec.components[c].size; ++k)
        assignment[static_cast<std::size_t>(row++)] = static_cast<int>(c);
  } else {
    for (int i = 0; i < spec.n; ++i) {
      const double u = rng.uniform();
      double acc = 0.0;
      int pick = static_cast<int>(spec.components.size()) - 1;
      for (std::size_t c = 0; c < spec.components.size(); ++c) {
        acc += spec.components[c].prob;
        if (u < acc) {
          pick = static_cast<int>(c);
          break;
        }
      }
      assignment[static_cast<std::size_t>(i)] = pick;
    }
  }

  for (int i = 0; i < spec.n; ++i) {
    const auto& comp = spec.components[static_cast<std::size_t>(assignment[i])];
    out.data.row(i).head(spec.activeDims) =
        detail::draw_active(comp, spec.activeDims, rng).transpose();
    for (int j = spec.activeDims; j < spec.p; ++j)
      out.data(i, j) =
          detail::draw_filler(spec.fillers[static_cast<std::size_t>(j - spec.activeDims)], rng);
    out.labels[static_cast<std::size_t>(i)] = comp.label;
  }
  return out;
}

namespace detail {

inline DgpComponent gaussian_component(int label, double prob, int size,
                                       const Eigen::VectorXd& mean,
                                       const Eigen::MatrixXd& cov) {
  DgpComponent comp;
  comp.family = "gaussian";
  comp.label = label;
  comp.prob = prob;
  comp.size = size;
  comp.mean = mean;
  comp.cov = cov;
  return comp;
}

inline Eigen::MatrixXd cov2(double v11, double v22, double v12) {
  Eigen::MatrixXd cov(2, 2);
  cov << v11, v12, v12, v22;
  return cov;
}

// Three separated clusters in the first two variables.
inline void add_three_cluster_geometry(DgpSpec& spec, const std::string& family,
                                       double df) {
  const Eigen::VectorXd mu1 = (Eigen::VectorXd(2) << -3.0, 0.0).finished();
  const Eigen::VectorXd mu2 = (Eigen::VectorXd(2) << 8.0, 0.0).finished();
  const Eigen::VectorXd mu3 = (Eigen::VectorXd(2) << 5.0, 9.0).finished();
  const Eigen::MatrixXd s1 = cov2(1.0, 1.0, 0.5);
  const Eigen::MatrixXd s2 = cov2(2.0, 2.0, -1.5);
  const Eigen::MatrixXd s3 = cov2(2.0, 2.0, 1.3);
  const double third = 1.0 / 3.0;
  int label = 1;
  for (const auto& [mu, sigma] :
       {std::pair{mu1, s1}, std::pair{mu2, s2}, std::pair{mu3, s3}}) {
    DgpComponent comp = gaussian_component(label++, third, 0, mu, sigma);
    comp.family = family;
    comp.df = df;
    spec.components.push_back(std::move(comp));
  }
}

}  // namespace detail

inline DgpSpec dgp_spec(int dgpId) {
  DgpSpec spec;
  switch (dgpId) {
    case 1:
    case 2: {
      spec.name = dgpId == 1 ? "dgp1" : "dgp2";
      spec.n = 1000;
      spec.p = 10;
      spec.activeDims = 2;
      spec.trueG = 3;
      detail::add_three_cluster_geometry(spec, "gaussian", 0.0);
      spec.fillers.assign(8, FillerSpec{"gaussian", 0.0});
      return spec;
    }
    case 3: {
      spec.name = "dgp3";
      spec.n = 2000;
      spec.p = 20;
      spec.activeDims = 2;
      spec.trueG = 3;
      detail::add_three_cluster_geometry(spec, "t", 3.0);
      spec.fillers.assign(18, FillerSpec{"gaussian", 0.0});
      return spec;
    }
    case 4: {
      spec.name = "dgp4";
      spec.n = 660;
      spec.p = 6;
      spec.activeDims = 4;
      spec.trueG = 5;
      auto vec4 = [](double a, double b, double c, double d) {
        return (Eigen::VectorXd(4) << a, b, c, d).finished();
      };
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(4, 4);
      spec.components.push_back(
          detail::gaussian_component(1, 0.0, 250, vec4(0, 0, 0, 0), eye));
      spec.components.push_back(
          detail::gaussian_component(2, 0.0, 150, vec4(6, 5, 0, 0), eye));
      {
        DgpComponent comp;
        comp.family = "exponential";
        comp.label = 3;
        comp.size = 70;
        comp.origin = vec4(-6, -6, 0, 0);
        comp.rate = Eigen::VectorXd::Ones(4);
        spec.components.push_back(std::move(comp));
      }
      {
        DgpComponent comp;
        comp.family = "t";
        comp.label = 4;
        comp.size = 70;
        comp.df = 2.0;
        comp.mean = vec4(0, 8, 2, 2);
        comp.cov = 0.5 * eye;
        spec.components.push_back(std::move(comp));
      }
      {
        DgpComponent comp;
        comp.family = "uniform";
        comp.label = 5;
        comp.size = 100;
        comp.center = vec4(2, 0, 4, 4);
        comp.range = 0.4;
        spec.components.push_back(std::move(comp));
      }
      {
        DgpComponent comp;  // wide uniform noise
        comp.family = "uniform";
        comp.label = 0;
        comp.size = 10;
        comp.center = vec4(0, 0, 0, 0);
        comp.range = 24.0;
        spec.components.push_back(std::move(comp));
      }
      {
        DgpComponent comp;  // wide t2 noise
        comp.family = "t";
        comp.label = 0;
        comp.size = 10;
        comp.df = 2.0;
        comp.mean = vec4(0, 0, 0, 0);
        comp.cov = 36.0 * eye;
        spec.components.push_back(std::move(comp));
      }
      spec.fillers = {FillerSpec{"gaussian", 0.0}, FillerSpec{"t", 2.0}};
      return spec;
    }
    default:
      throw ConfigError("dgpId must be 1, 2, 3 or 4");
  }
}

inline LabeledDataset generate_dgp(int dgpId, std::uint64_t seed) {
  LabeledDataset out = generate(dgp_spec(dgpId), seed);
  if (dgpId == 2) {
    // one observation of cluster 1 turned into a gross outlier in variable 3
    int row = 0;
    for (std::size_t i = 0; i < out.labels.size(); ++i)
      if (out.labels[i] == 1) {
        row = static_cast<int>(i);
        break;
      }
    out.data(row, 2) = 1000.0;
    out.dgpId = "dgp2";
  }
  return out;
}

namespace detail {

inline Eigen::VectorXd json_vec(const nlohmann::json& j) {
  const std::vector<double> v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<int>(v.size()));
}

inline Eigen::MatrixXd json_mat(const nlohmann::json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  Eigen::MatrixXd m(static_cast<int>(rows.size()),
                    rows.empty() ? 0 : static_cast<int>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      m(static_cast<int>(i), static_cast<int>(k)) = rows[i][k];
  return m;
}

}  // namespace detail

inline DgpSpec dgp_spec_from_json(const nlohmann::json& j) {
  DgpSpec spec;
  spec.name = j.value("name", "custom");
  spec.n = j.at("n").get<int>();
  spec.p = j.at("p").get<int>();
  spec.activeDims = j.at("activeDims").get<int>();
  spec.trueG = j.at("trueG").get<int>();
  for (const auto& f : j.at("fillers")) {
    FillerSpec filler;
    filler.family = f.at("family").get<std::string>();
    filler.df = f.value("df", 0.0);
    spec.fillers.push_back(filler);
  }
  for (const auto& c : j.at("components")) {
    DgpComponent comp;
    comp.family = c.at("family").get<std::string>();
    comp.label = c.at("label").get<int>();
    comp.prob = c.value("prob", 0.0);
    comp.size = c.value("size", 0);
    comp.df = c.value("df", 0.0);
    comp.range = c.value("range", 0.0);
    if (c.contains("mean")) comp.mean = detail::json_vec(c.at("mean"));
    if (c.contains("cov")) comp.cov = detail::json_mat(c.at("cov"));
    if (c.contains("origin")) comp.origin = detail::json_vec(c.at("origin"));
    if (c.contains("rate")) comp.rate = detail::json_vec(c.at("rate"));
    if (c.contains("center")) comp.center = detail::json_vec(c.at("center"));
    spec.components.push_back(std::move(comp));
  }
  detail::check_dgp_spec(spec);
  return spec;
}

}  // namespace otrimle
