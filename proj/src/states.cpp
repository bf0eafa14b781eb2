#include "sqht/states.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"

namespace sqht {

namespace {

using nlohmann::json;

void require(bool ok, ErrorKind kind, const std::string& detail) {
  if (!ok) throw Error(kind, detail);
}

}  // namespace

DensityMatrix::DensityMatrix(Cmat matrix) : matrix_(std::move(matrix)) {
  require(matrix_.rows() == matrix_.cols() && matrix_.rows() >= 1,
          ErrorKind::Validation, "density matrix must be square");
  require(all_finite(matrix_), ErrorKind::Validation, "entries not finite");
  require(hermiticity_defect(matrix_) <= tol::kHermitian, ErrorKind::Validation,
          "hermitian");
  matrix_ = 0.5 * (matrix_ + matrix_.adjoint().eval());
  const double trace = matrix_.trace().real();
  require(std::abs(trace - 1.0) <= tol::kHermitian, ErrorKind::Validation, "trace");
  const HermitianEig eig = hermitian_eig(matrix_);
  min_eigenvalue_ = eig.eigenvalues.minCoeff();
  require(min_eigenvalue_ >= -tol::kZeroEigenvalue, ErrorKind::Validation,
          "positive semidefinite");
}

Povm::Povm(std::vector<std::string> outcomes, std::vector<Cmat> elements)
    : outcomes_(std::move(outcomes)), elements_(std::move(elements)) {
  require(!elements_.empty(), ErrorKind::Validation, "POVM needs at least one element");
  require(outcomes_.size() == elements_.size(), ErrorKind::Validation,
          "outcome labels must match elements");
  const Eigen::Index d = elements_.front().rows();
  Cmat sum = Cmat::Zero(d, d);
  for (const Cmat& e : elements_) {
    require(e.rows() == d && e.cols() == d, ErrorKind::Validation,
            "POVM elements must share one dimension");
    require(all_finite(e), ErrorKind::Validation, "entries not finite");
    require(hermiticity_defect(e) <= tol::kHermitian, ErrorKind::Validation,
            "POVM element hermitian");
    const HermitianEig eig = hermitian_eig(e);
    require(eig.eigenvalues.minCoeff() >= -tol::kHermitian, ErrorKind::Validation,
            "POVM element positive semidefinite");
    sum += e;
  }
  require((sum - Cmat::Identity(d, d)).norm() <= tol::kPovmCompleteness,
          ErrorKind::Validation, "POVM completeness");
}

Povm Povm::with_prefixed_labels(const std::string& prefix) const {
  std::vector<std::string> labels;
  labels.reserve(outcomes_.size());
  for (const auto& name : outcomes_) labels.push_back(prefix + name);
  return Povm(std::move(labels), elements_);
}

Povm Povm::computational_basis(int dim) {
  std::vector<std::string> labels;
  std::vector<Cmat> elements;
  for (int i = 0; i < dim; ++i) {
    Cmat e = Cmat::Zero(dim, dim);
    e(i, i) = 1.0;
    elements.push_back(std::move(e));
    labels.push_back(std::to_string(i));
  }
  return Povm(std::move(labels), std::move(elements));
}

Povm Povm::from_basis(const Cmat& unitary) {
  require(unitary.rows() == unitary.cols(), ErrorKind::Validation,
          "basis matrix must be square");
  const Eigen::Index d = unitary.rows();
  require((unitary.adjoint() * unitary - Cmat::Identity(d, d)).norm() <=
              tol::kPovmCompleteness,
          ErrorKind::Validation, "basis matrix must be unitary");
  std::vector<std::string> labels;
  std::vector<Cmat> elements;
  for (Eigen::Index i = 0; i < d; ++i) {
    const Cvec v = unitary.col(i);
    elements.push_back(v * v.adjoint());
    labels.push_back(std::to_string(i));
  }
  return Povm(std::move(labels), std::move(elements));
}

Povm Povm::trivial(int dim) {
  std::vector<Cmat> elements{Cmat::Identity(dim, dim)};
  return Povm({"0"}, std::move(elements));
}

StatePair::StatePair(DensityMatrix rho0_in, DensityMatrix rho1_in, std::string label_in)
    : rho0(std::move(rho0_in)), rho1(std::move(rho1_in)), label(std::move(label_in)) {
  require(rho0.dim() == rho1.dim(), ErrorKind::DimensionMismatch,
          "state pair dimensions differ");
  require(rho0.full_support() && rho1.full_support(), ErrorKind::Validation,
          "full support");
}

Rvec born_distribution(const DensityMatrix& rho, const Povm& m) {
  if (rho.dim() != m.dim())
    throw Error(ErrorKind::DimensionMismatch, "state and POVM dimensions differ");
  Rvec p(m.size());
  for (int x = 0; x < m.size(); ++x) {
    double v = (rho.matrix() * m.element(x)).trace().real();
    if (v < 0.0) {
      if (v < -tol::kProbClip)
        throw Error(ErrorKind::Internal, "Born probability below clip tolerance");
      v = 0.0;
    }
    p[x] = std::min(v, 1.0);
  }
  const double total = p.sum();
  if (std::abs(total - 1.0) > tol::kPovmCompleteness)
    throw Error(ErrorKind::Internal, "Born probabilities do not sum to one");
  return p / total;
}

DensityMatrix tensor_power(const DensityMatrix& rho, int l, int dimension_cap) {
  if (l < 1) throw Error(ErrorKind::OutOfRange, "tensor power requires l >= 1");
  Cmat out = rho.matrix();
  for (int i = 1; i < l; ++i) out = kron(out, rho.matrix(), dimension_cap);
  return DensityMatrix(std::move(out));
}

StatePair qubit_family(double r0, double r1, double theta) {
  if (!(r0 >= 0.0 && r0 <= 1.0) || !(r1 >= 0.0 && r1 <= 1.0))
    throw Error(ErrorKind::OutOfRange, "r parameters must lie in [0,1]");
  if (!(theta >= 0.0 && theta <= M_PI))
    throw Error(ErrorKind::OutOfRange, "theta must lie in [0,pi]");
  if (r0 >= 1.0 || r1 >= 1.0)
    throw Error(ErrorKind::NotFullSupport, "r = 1 gives a pure component with a zero eigenvalue");
  const double c = std::cos(theta / 4.0);
  const double s = std::sin(theta / 4.0);
  auto make = [&](double r, double sign) {
    Eigen::Vector2cd psi(c, sign * s);
    Cmat rho = r * (psi * psi.adjoint()) + (1.0 - r) * 0.5 * Cmat::Identity(2, 2);
    return DensityMatrix(std::move(rho));
  };
  std::ostringstream label;
  label << "qubit(r0=" << r0 << ",r1=" << r1 << ",theta=" << theta << ")";
  return StatePair(make(r0, +1.0), make(r1, -1.0), label.str());
}

namespace {

Cmat matrix_from_json(const json& rows, int dim, const std::string& name) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != dim)
    throw Error(ErrorKind::Schema, name + " must be a " + std::to_string(dim) +
                                       "-row nested array");
  Cmat out(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const json& row = rows.at(i);
    if (!row.is_array() || static_cast<int>(row.size()) != dim)
      throw Error(ErrorKind::Schema, name + " row " + std::to_string(i) + " malformed");
    for (int j = 0; j < dim; ++j) {
      const json& cell = row.at(j);
      if (!cell.is_array() || cell.size() != 2 || !cell.at(0).is_number() ||
          !cell.at(1).is_number())
        throw Error(ErrorKind::Schema,
                    name + " entries must be [re, im] number pairs");
      out(i, j) = std::complex<double>(cell.at(0).get<double>(), cell.at(1).get<double>());
    }
  }
  return out;
}

json matrix_to_json(const Cmat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

StatePair parse_state_pair(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Schema, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::Schema, "top level must be an object");
  std::string label = doc.value("label", std::string());

  if (doc.contains("family")) {
    if (doc.contains("rho0") || doc.contains("rho1"))
      throw Error(ErrorKind::Schema, "family replaces rho0/rho1");
    const json& fam = doc.at("family");
    if (!fam.is_object() || fam.value("type", std::string()) != "qubit")
      throw Error(ErrorKind::Schema, "family.type must be \"qubit\"");
    if (doc.contains("dim") && doc.at("dim").get<int>() != 2)
      throw Error(ErrorKind::Schema, "qubit family requires dim = 2");
    for (const char* key : {"r0", "r1", "theta"})
      if (!fam.contains(key) || !fam.at(key).is_number())
        throw Error(ErrorKind::Schema, std::string("family.") + key + " missing");
    StatePair pair = qubit_family(fam.at("r0").get<double>(), fam.at("r1").get<double>(),
                                  fam.at("theta").get<double>());
    if (!label.empty()) pair.label = label;
    return pair;
  }

  if (!doc.contains("dim") || !doc.at("dim").is_number_integer())
    throw Error(ErrorKind::Schema, "dim missing");
  const int dim = doc.at("dim").get<int>();
  if (dim < 1 || dim > kDefaultDimensionCap)
    throw Error(ErrorKind::Schema, "dim out of range");
  if (!doc.contains("rho0") || !doc.contains("rho1"))
    throw Error(ErrorKind::Schema, "rho0/rho1 missing");
  DensityMatrix rho0(matrix_from_json(doc.at("rho0"), dim, "rho0"));
  DensityMatrix rho1(matrix_from_json(doc.at("rho1"), dim, "rho1"));
  return StatePair(std::move(rho0), std::move(rho1), label);
}

std::string state_pair_to_json(const StatePair& pair) {
  nlohmann::ordered_json doc;
  doc["dim"] = pair.dim();
  doc["rho0"] = matrix_to_json(pair.rho0.matrix());
  doc["rho1"] = matrix_to_json(pair.rho1.matrix());
  if (!pair.label.empty()) doc["label"] = pair.label;
  return doc.dump(2);
}

Povm parse_povm(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Schema, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("dim") || !doc.contains("elements"))
    throw Error(ErrorKind::Schema, "POVM document needs dim and elements");
  const int dim = doc.at("dim").get<int>();
  const json& elems = doc.at("elements");
  if (!elems.is_array() || elems.empty())
    throw Error(ErrorKind::Schema, "elements must be a non-empty array");
  std::vector<Cmat> elements;
  for (std::size_t x = 0; x < elems.size(); ++x)
    elements.push_back(matrix_from_json(elems.at(x), dim, "elements[" + std::to_string(x) + "]"));
  std::vector<std::string> labels;
  if (doc.contains("labels")) {
    if (!doc.at("labels").is_array() || doc.at("labels").size() != elems.size())
      throw Error(ErrorKind::Schema, "labels must match elements");
    for (const auto& l : doc.at("labels")) labels.push_back(l.get<std::string>());
  } else {
    for (std::size_t x = 0; x < elems.size(); ++x) labels.push_back(std::to_string(x));
  }
  return Povm(std::move(labels), std::move(elements));
}

std::string povm_to_json(const Povm& m) {
  nlohmann::ordered_json doc;
  doc["dim"] = m.dim();
  json elems = json::array();
  for (const Cmat& e : m.elements()) elems.push_back(matrix_to_json(e));
  doc["elements"] = std::move(elems);
  doc["labels"] = m.outcomes();
  return doc.dump(2);
}

}  // namespace sqht
