#include "mvocc/kernels.hpp"

#include "mvocc/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace mvocc {

void KernelSpec::validate() const {
  if (kind == KernelKind::rbf && !(sigma > 0.0 && std::isfinite(sigma)))
    throw ParameterError("RBF kernel width must be positive, got " + std::to_string(sigma));
}

double KernelSpec::operator()(const Eigen::Ref<const VectorXd>& x, const Eigen::Ref<const VectorXd>& y) const {
  if (kind == KernelKind::linear) return x.dot(y);
  return std::exp(-(x - y).squaredNorm() / (2.0 * sigma * sigma));
}

const char* to_string(KernelKind kind) noexcept { return kind == KernelKind::linear ? "linear" : "rbf"; }

KernelKind kernel_kind_from_string(const std::string& name) {
  if (name == "linear") return KernelKind::linear;
  if (name == "rbf" || name == "gaussian") return KernelKind::rbf;
  throw ConfigError("unknown kernel '" + name + "' (expected linear or rbf)");
}

MatrixXd gram_matrix(const MatrixXd& a, const MatrixXd& b, const KernelSpec& spec) {
  spec.validate();
  if (a.rows() != b.rows())
    throw ShapeError("gram_matrix: row dimensions differ (" + std::to_string(a.rows()) + " vs " +
                     std::to_string(b.rows()) + ")");
  if (!a.allFinite() || !b.allFinite()) throw NumericError("gram_matrix: non-finite input");
  if (spec.kind == KernelKind::linear) return a.transpose() * b;

  const double scale = -1.0 / (2.0 * spec.sigma * spec.sigma);
  MatrixXd k(a.cols(), b.cols());
  for (Index j = 0; j < b.cols(); ++j) {
    for (Index i = 0; i < a.cols(); ++i) k(i, j) = std::exp(scale * (a.col(i) - b.col(j)).squaredNorm());
  }
  return k;
}

MatrixXd NptEmbedding::training_embedding() const {
  return eigvals.cwiseSqrt().asDiagonal() * eigvecs.transpose();
}

NptEmbedding npt_embed(const MatrixXd& k_train, double rank_tol) {
  const Index n = k_train.rows();
  if (n == 0 || k_train.cols() != n) throw ShapeError("npt_embed: kernel matrix must be square and non-empty");
  if (!k_train.allFinite()) throw NumericError("npt_embed: non-finite kernel entries");

  NptEmbedding emb;
  emb.row_means = k_train.rowwise().mean();
  emb.grand_mean = emb.row_means.mean();
  MatrixXd centered = k_train;
  centered.colwise() -= emb.row_means;
  centered.rowwise() -= emb.row_means.transpose();
  centered.array() += emb.grand_mean;
  centered = 0.5 * (centered + centered.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(centered);
  if (eig.info() != Eigen::Success) throw NumericError("npt_embed: eigendecomposition failed");
  const VectorXd& values = eig.eigenvalues(); // ascending
  const double lambda_max = values(n - 1);
  const double scale = std::max(1.0, k_train.diagonal().cwiseAbs().mean());
  if (!(lambda_max > 1e-12 * scale))
    throw DegenerateKernelError("npt_embed: centered kernel has no eigenvalue above tolerance");

  const double cutoff = rank_tol * lambda_max;
  Index m = 0;
  for (Index i = n - 1; i >= 0 && values(i) > cutoff; --i) ++m;
  emb.eigvals.resize(m);
  emb.eigvecs.resize(n, m);
  for (Index j = 0; j < m; ++j) {
    emb.eigvals(j) = std::max(values(n - 1 - j), 0.0);
    VectorXd v = eig.eigenvectors().col(n - 1 - j);
    // deterministic sign: largest-magnitude component positive
    Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    emb.eigvecs.col(j) = v;
  }
  return emb;
}

NptEmbedding npt_fit(const MatrixXd& train, const KernelSpec& spec, double rank_tol) {
  NptEmbedding emb = npt_embed(gram_matrix(train, train, spec), rank_tol);
  emb.kernel = spec;
  emb.train_refs = train;
  return emb;
}

MatrixXd npt_map(const NptEmbedding& emb, const MatrixXd& k_test) {
  if (k_test.rows() != emb.train_size())
    throw ShapeError("npt_map: kernel block has " + std::to_string(k_test.rows()) + " rows, embedding expects " +
                     std::to_string(emb.train_size()));
  if (k_test.cols() == 0) return MatrixXd(emb.rank(), 0);
  MatrixXd centered = k_test;
  const VectorXd col_means = k_test.colwise().mean().transpose();
  centered.colwise() -= emb.row_means;
  centered.rowwise() -= col_means.transpose();
  centered.array() += emb.grand_mean;
  return emb.eigvals.cwiseSqrt().cwiseInverse().asDiagonal() * (emb.eigvecs.transpose() * centered);
}

MatrixXd npt_transform(const NptEmbedding& emb, const MatrixXd& samples) {
  if (emb.train_refs.size() == 0) throw ShapeError("npt_transform: embedding has no stored training columns");
  return npt_map(emb, gram_matrix(emb.train_refs, samples, emb.kernel));
}

} // namespace mvocc
