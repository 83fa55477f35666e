#pragma once

// Multinomial logistic regression trained by full-batch gradient descent
// with step-halving on loss increase. Deterministic for a fixed config;
// reproducibility outranks speed at this scale. Features are standardized
// (fit on training data) so one config serves the very differently scaled
// weighting schemes.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tfcr/corpus.hpp"
#include "tfcr/util.hpp"

namespace tfcr {

struct TrainConfig {
  double l2_lambda = 1e-4;
  double learning_rate = 0.1;
  int max_epochs = 200;
  double tolerance = 1e-6;  // relative loss improvement
  std::uint64_t seed = 0;
};

struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd stdev;  // > 0 everywhere; zero-variance features get 1
};

struct LogRegModel {
  Eigen::MatrixXd W;  // n_classes x n_features
  Eigen::VectorXd b;  // n_classes
  LabelSet label_set;
  Standardization standardization;

  int n_classes() const { return static_cast<int>(W.rows()); }
  int n_features() const { return static_cast<int>(W.cols()); }
};

inline Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::VectorXd rowmax = logits.rowwise().maxCoeff();
  Eigen::MatrixXd p = (logits.colwise() - rowmax).array().exp();
  Eigen::VectorXd sums = p.rowwise().sum();
  return p.array().colwise() / sums.array();
}

// Cross-entropy + (lambda/2)*||W||_F^2 over an (already standardized)
// feature matrix. Exposed so tests can check the gradient against finite
// differences.
inline double softmax_loss(const Eigen::MatrixXd& X, const std::vector<int>& y,
                           const Eigen::MatrixXd& W, const Eigen::VectorXd& b,
                           double lambda) {
  const auto n = X.rows();
  Eigen::MatrixXd logits = X * W.transpose();
  logits.rowwise() += b.transpose();
  Eigen::VectorXd rowmax = logits.rowwise().maxCoeff();
  Eigen::VectorXd lse =
      rowmax.array() +
      (logits.colwise() - rowmax).array().exp().rowwise().sum().log();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    loss += lse(i) - logits(i, y[static_cast<std::size_t>(i)]);
  loss /= static_cast<double>(n);
  loss += 0.5 * lambda * W.squaredNorm();
  return loss;
}

inline double softmax_loss_grad(const Eigen::MatrixXd& X,
                                const std::vector<int>& y,
                                const Eigen::MatrixXd& W,
                                const Eigen::VectorXd& b, double lambda,
                                Eigen::MatrixXd& grad_W,
                                Eigen::VectorXd& grad_b) {
  const auto n = X.rows();
  Eigen::MatrixXd logits = X * W.transpose();
  logits.rowwise() += b.transpose();
  Eigen::VectorXd rowmax = logits.rowwise().maxCoeff();
  Eigen::MatrixXd shifted = (logits.colwise() - rowmax).array().exp();
  Eigen::VectorXd sums = shifted.rowwise().sum();

  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    loss += rowmax(i) + std::log(sums(i)) -
            logits(i, y[static_cast<std::size_t>(i)]);
  loss /= static_cast<double>(n);
  loss += 0.5 * lambda * W.squaredNorm();

  Eigen::MatrixXd delta = shifted.array().colwise() / sums.array();  // = P
  for (Eigen::Index i = 0; i < n; ++i)
    delta(i, y[static_cast<std::size_t>(i)]) -= 1.0;  // P - Y
  grad_W = (delta.transpose() * X) / static_cast<double>(n);
  grad_W += lambda * W;
  grad_b = delta.colwise().sum().transpose() / static_cast<double>(n);
  return loss;
}

namespace detail {

inline Standardization fit_standardization(const Eigen::MatrixXd& X) {
  Standardization s;
  s.mean = X.colwise().mean();
  Eigen::MatrixXd centered = X.rowwise() - s.mean.transpose();
  Eigen::VectorXd var = centered.array().square().colwise().mean();
  s.stdev = var.array().sqrt();
  for (Eigen::Index j = 0; j < s.stdev.size(); ++j)
    if (!(s.stdev(j) > 1e-12)) s.stdev(j) = 1.0;
  return s;
}

inline Eigen::MatrixXd apply_standardization(const Standardization& s,
                                             const Eigen::MatrixXd& X) {
  Eigen::MatrixXd out = X.rowwise() - s.mean.transpose();
  out.array().rowwise() /= s.stdev.transpose().array();
  return out;
}

}  // namespace detail

inline LogRegModel train(const Eigen::MatrixXd& X, const std::vector<int>& y,
                         const LabelSet& labels, const TrainConfig& cfg = {}) {
  if (static_cast<std::size_t>(X.rows()) != y.size())
    throw std::invalid_argument("train: X rows and y length differ");
  if (!X.allFinite())
    throw std::invalid_argument("train: non-finite value in feature matrix");
  const int k = labels.k();
  std::set<int> present;
  for (int yi : y) {
    if (yi < 0 || yi >= k)
      throw std::out_of_range("train: label id out of range");
    present.insert(yi);
  }
  if (present.size() < 2)
    throw std::invalid_argument("train: fewer than 2 classes present");

  LogRegModel model;
  model.label_set = labels;
  model.standardization = detail::fit_standardization(X);
  Eigen::MatrixXd Xs = detail::apply_standardization(model.standardization, X);

  const auto m = X.cols();
  model.W = Eigen::MatrixXd::Zero(k, m);
  model.b = Eigen::VectorXd::Zero(k);

  Eigen::MatrixXd grad_W;
  Eigen::VectorXd grad_b;
  double loss = softmax_loss_grad(Xs, y, model.W, model.b, cfg.l2_lambda,
                                  grad_W, grad_b);

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    double lr = cfg.learning_rate;
    Eigen::MatrixXd W_try;
    Eigen::VectorXd b_try;
    double new_loss = 0.0;
    int halvings = 0;
    while (true) {
      W_try = model.W - lr * grad_W;
      b_try = model.b - lr * grad_b;
      new_loss = softmax_loss(Xs, y, W_try, b_try, cfg.l2_lambda);
      if (new_loss <= loss) break;
      if (++halvings > 30) return model;  // no non-increasing step found
      lr *= 0.5;
    }
    model.W = std::move(W_try);
    model.b = std::move(b_try);
    double improvement = (loss - new_loss) / std::max(std::abs(loss), 1e-12);
    loss = new_loss;
    if (improvement < cfg.tolerance) break;
    softmax_loss_grad(Xs, y, model.W, model.b, cfg.l2_lambda, grad_W, grad_b);
  }
  return model;
}

inline Eigen::MatrixXd predict_proba(const LogRegModel& model,
                                     const Eigen::MatrixXd& X) {
  if (X.cols() != model.W.cols())
    throw std::invalid_argument("predict: feature count mismatch (got " +
                                std::to_string(X.cols()) + ", model has " +
                                std::to_string(model.W.cols()) + ")");
  Eigen::MatrixXd Xs = detail::apply_standardization(model.standardization, X);
  Eigen::MatrixXd logits = Xs * model.W.transpose();
  logits.rowwise() += model.b.transpose();
  return softmax_rows(logits);
}

// Argmax of the logits per row; ties break toward the lowest class index.
inline std::vector<int> predict(const LogRegModel& model,
                                const Eigen::MatrixXd& X) {
  if (X.cols() != model.W.cols())
    throw std::invalid_argument("predict: feature count mismatch (got " +
                                std::to_string(X.cols()) + ", model has " +
                                std::to_string(model.W.cols()) + ")");
  Eigen::MatrixXd Xs = detail::apply_standardization(model.standardization, X);
  Eigen::MatrixXd logits = Xs * model.W.transpose();
  logits.rowwise() += model.b.transpose();
  std::vector<int> out(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    int best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c)
      if (logits(i, c) > logits(i, best)) best = static_cast<int>(c);
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

// --- portable text model format ----------------------------------------------

inline void save_model(const LogRegModel& model, std::ostream& out) {
  const int k = model.n_classes();
  const int m = model.n_features();
  out << "tfcr-logreg 1\n";
  out << "classes " << k << "\n";
  out << "features " << m << "\n";
  for (int c = 0; c < k; ++c) out << "label " << model.label_set.label(c) << "\n";
  auto write_row = [&out](const char* tag, const double* v, int n) {
    out << tag;
    for (int j = 0; j < n; ++j) out << ' ' << format_double17(v[j]);
    out << '\n';
  };
  write_row("mean", model.standardization.mean.data(), m);
  write_row("std", model.standardization.stdev.data(), m);
  write_row("bias", model.b.data(), k);
  for (int c = 0; c < k; ++c) {
    out << "w";
    for (int j = 0; j < m; ++j) out << ' ' << format_double17(model.W(c, j));
    out << '\n';
  }
}

inline void save_model(const LogRegModel& model,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  save_model(model, out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline LogRegModel parse_model(std::string_view content,
                               const std::string& source = "<model>") {
  auto fail = [&source](std::size_t line, const std::string& what) {
    throw std::runtime_error(source + ":" + std::to_string(line) + ": " + what);
  };
  auto lines = content_lines(content);
  std::size_t ln = 0;
  auto next = [&]() -> std::string_view {
    if (ln >= lines.size())
      throw std::runtime_error(source + ": truncated model file");
    return strip_cr(lines[ln++]);
  };

  if (next() != "tfcr-logreg 1") fail(1, "bad magic (expected 'tfcr-logreg 1')");

  auto parse_header_int = [&](const char* key) -> int {
    auto line = next();
    auto toks = split_ws(line);
    std::uint64_t v = 0;
    if (toks.size() != 2 || toks[0] != key || !parse_uint(toks[1], v) || v == 0)
      fail(ln, std::string("expected '") + key + " <n>'");
    return static_cast<int>(v);
  };
  const int k = parse_header_int("classes");
  const int m = parse_header_int("features");

  std::vector<std::string> labels;
  for (int c = 0; c < k; ++c) {
    auto line = next();
    if (!line.starts_with("label "))
      fail(ln, "expected 'label <name>'");
    labels.emplace_back(line.substr(6));
  }

  auto parse_values = [&](const char* tag, int n, double* dst) {
    auto line = next();
    auto toks = split_ws(line);
    if (toks.empty() || toks[0] != tag ||
        static_cast<int>(toks.size()) - 1 != n)
      fail(ln, std::string("expected '") + tag + "' with " +
                   std::to_string(n) + " values");
    for (int j = 0; j < n; ++j)
      if (!parse_double(toks[static_cast<std::size_t>(j) + 1], dst[j]))
        fail(ln, "non-numeric value");
  };

  LogRegModel model;
  model.label_set = LabelSet(std::move(labels));
  model.standardization.mean.resize(m);
  model.standardization.stdev.resize(m);
  model.b.resize(k);
  model.W.resize(k, m);
  parse_values("mean", m, model.standardization.mean.data());
  parse_values("std", m, model.standardization.stdev.data());
  parse_values("bias", k, model.b.data());
  std::vector<double> row(static_cast<std::size_t>(m));
  for (int c = 0; c < k; ++c) {
    parse_values("w", m, row.data());
    for (int j = 0; j < m; ++j) model.W(c, j) = row[static_cast<std::size_t>(j)];
  }
  return model;
}

inline LogRegModel load_model(const std::filesystem::path& path) {
  return parse_model(read_file(path.string()), path.string());
}

}  // namespace tfcr
