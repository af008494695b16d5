#include "gaussmom/model.hpp"

#include <algorithm>

namespace gaussmom {

namespace {

std::string shape_text(long r, long c) { return std::to_string(r) + "x" + std::to_string(c); }

}  // namespace

long ModelExpr::size() const {
  switch (kind) {
    case NodeKind::kDet:
      return rows;
    case NodeKind::kGaussSum:
      return children[1].n;
    case NodeKind::kChain:
    case NodeKind::kScale:
      return children[0].size();
    default:
      return n;
  }
}

bool operator==(const ModelExpr& a, const ModelExpr& b) {
  return a.kind == b.kind && a.name == b.name && a.rows == b.rows && a.cols == b.cols && a.n == b.n && a.N == b.N &&
         a.sigma == b.sigma && a.factor == b.factor && a.children == b.children;
}

ModelExpr det(std::string name, long rows, long cols) {
  ModelExpr e;
  e.kind = NodeKind::kDet;
  e.name = std::move(name);
  e.rows = rows;
  e.cols = cols;
  return e;
}

ModelExpr gauss_complex(long n, long N, Rational sigma) {
  ModelExpr e;
  e.kind = NodeKind::kGaussComplex;
  e.n = n;
  e.N = N;
  e.sigma = std::move(sigma);
  return e;
}

ModelExpr gauss_selfadjoint(long n, Rational sigma) {
  ModelExpr e;
  e.kind = NodeKind::kGaussSelfAdjoint;
  e.n = n;
  e.sigma = std::move(sigma);
  return e;
}

ModelExpr corr_product(ModelExpr r, ModelExpr s, long n, long N) {
  ModelExpr e;
  e.kind = NodeKind::kCorrProduct;
  e.n = n;
  e.N = N;
  e.children = {std::move(r), std::move(s)};
  return e;
}

ModelExpr gauss_sum(ModelExpr r, ModelExpr noise) {
  if (noise.kind != NodeKind::kGaussComplex) throw ModelError("sum(...) needs a gC(...) noise term");
  ModelExpr e;
  e.kind = NodeKind::kGaussSum;
  e.n = noise.n;
  e.N = noise.N;
  e.sigma = noise.sigma;
  e.children = {std::move(r), std::move(noise)};
  return e;
}

ModelExpr selfadj_product(ModelExpr base, long n) {
  ModelExpr e;
  e.kind = NodeKind::kSelfAdjProduct;
  e.n = n;
  e.children = {std::move(base)};
  return e;
}

ModelExpr selfadj_sum(ModelExpr base, long n, Rational sigma) {
  ModelExpr e;
  e.kind = NodeKind::kSelfAdjSum;
  e.n = n;
  e.sigma = std::move(sigma);
  e.children = {std::move(base)};
  return e;
}

ModelExpr chain(ModelExpr base, std::vector<ModelExpr> factors) {
  ModelExpr e;
  e.kind = NodeKind::kChain;
  e.children.push_back(std::move(base));
  for (auto& f : factors) {
    if (f.kind != NodeKind::kGaussComplex) throw ModelError("chain factors must be gC(...)");
    e.children.push_back(std::move(f));
  }
  return e;
}

ModelExpr scale(ModelExpr base, Rational factor) {
  ModelExpr e;
  e.kind = NodeKind::kScale;
  e.factor = std::move(factor);
  e.children = {std::move(base)};
  return e;
}

void check_dimensions(const ModelExpr& m) {
  for (const auto& c : m.children) check_dimensions(c);
  auto mismatch = [](const std::string& what) { throw ModelError("dimension mismatch: " + what); };
  switch (m.kind) {
    case NodeKind::kDet:
      if (m.rows < 1 || m.cols < 1) mismatch("det(" + m.name + ") needs positive dimensions");
      return;
    case NodeKind::kGaussComplex:
    case NodeKind::kGaussSelfAdjoint:
      if (m.sigma < 0) throw ModelError("noise level must be nonnegative");
      return;
    case NodeKind::kGaussSum: {
      const ModelExpr& base = m.children[0];
      if (base.kind == NodeKind::kDet) {
        if (base.rows != m.n || base.cols != m.N)
          mismatch("det(" + base.name + ", " + shape_text(base.rows, base.cols) + ") added to gC(" +
                   std::to_string(m.n) + ", " + std::to_string(m.N) + ") needs " + shape_text(m.n, m.N));
      } else if (base.size() != m.n) {
        mismatch("sum of a " + shape_text(base.size(), base.size()) + " term and gC(" + std::to_string(m.n) + ", " +
                 std::to_string(m.N) + ")");
      }
      return;
    }
    case NodeKind::kCorrProduct:
      if (m.children[0].size() != m.n)
        mismatch("wprod left factor is " + shape_text(m.children[0].size(), m.children[0].size()) + ", expected " +
                 shape_text(m.n, m.n));
      if (m.children[1].size() != m.N)
        mismatch("wprod right factor is " + shape_text(m.children[1].size(), m.children[1].size()) + ", expected " +
                 shape_text(m.N, m.N));
      return;
    case NodeKind::kChain:
      for (std::size_t i = 1; i < m.children.size(); ++i)
        if (m.children[i].n != m.children[0].size())
          mismatch("chain base is " + shape_text(m.children[0].size(), m.children[0].size()) + " but factor " +
                   std::to_string(i) + " is gC(" + std::to_string(m.children[i].n) + ", " +
                   std::to_string(m.children[i].N) + ")");
      return;
    case NodeKind::kSelfAdjProduct:
    case NodeKind::kSelfAdjSum:
      if (m.children[0].size() != m.n)
        mismatch("selfadjoint term of size " + std::to_string(m.n) + " applied to a " +
                 shape_text(m.children[0].size(), m.children[0].size()) + " matrix");
      if (m.sigma < 0) throw ModelError("noise level must be nonnegative");
      return;
    case NodeKind::kScale:
      return;
  }
}

MomentVector constant_leaf_moments(const ModelExpr& leaf, bool gram, int max_weight) {
  if (!leaf.is_constant_leaf()) throw std::invalid_argument("not a constant leaf");
  std::vector<Rational> eigenvalues(static_cast<std::size_t>(leaf.rows), Rational(0));
  if (leaf.is_identity_leaf()) {
    if (gram || leaf.rows != leaf.cols) {
      long rank = std::min(leaf.rows, leaf.cols);
      for (long i = 0; i < rank; ++i) eigenvalues[static_cast<std::size_t>(i)] = Rational(1, leaf.cols);
    } else {
      std::fill(eigenvalues.begin(), eigenvalues.end(), Rational(1));
    }
  }
  return eval_mixed_moments(std::span<const Rational>(eigenvalues), max_weight);
}

bool observes_amplitude(const ModelExpr& model) {
  return model.kind == NodeKind::kGaussSum || model.kind == NodeKind::kGaussComplex ||
         (model.kind == NodeKind::kDet && model.rows != model.cols);
}

long amplitude_columns(const ModelExpr& model) {
  switch (model.kind) {
    case NodeKind::kGaussSum:
    case NodeKind::kGaussComplex:
      return model.N;
    case NodeKind::kDet:
      return model.cols;
    default:
      throw std::logic_error("model is not observed through an amplitude");
  }
}

// ---------------------------------------------------------------------------
// Compilation

namespace {

struct Partial {
  std::vector<TransferMap> stages;
  std::optional<MomentVector> constant;
  ModelInput input;
  Basis input_basis;
};

MomentVector zero_moments(int max_weight) {
  Basis basis = Basis::one_sided(max_weight);
  std::vector<Rational> v(basis.size(), Rational(0));
  v[0] = 1;
  return MomentVector::exact(std::move(basis), std::move(v));
}

bool all_ones(const MomentVector& v) {
  return std::all_of(v.exact_values().begin(), v.exact_values().end(), [](const Rational& q) { return q == 1; });
}

void push_stage(Partial& part, const TransferMap& map) {
  if (part.constant) {
    part.constant = map.apply(*part.constant);
  } else {
    part.stages.push_back(map);
  }
}

Partial compile_node(const ModelExpr& m, int P, bool gram) {
  Partial part;
  part.input_basis = Basis::one_sided(P);
  switch (m.kind) {
    case NodeKind::kDet:
      if (m.is_constant_leaf()) {
        part.constant = constant_leaf_moments(m, gram, P);
      } else {
        part.input.kind = gram || m.rows != m.cols ? ModelInput::Kind::kGram : ModelInput::Kind::kMatrix;
        part.input.names = {m.name};
        part.input.shapes = {{m.rows, m.cols}};
      }
      return part;
    case NodeKind::kGaussComplex:
      part.constant = gauss_sum_transfer(m.n, m.N, P, m.sigma * m.sigma).apply(zero_moments(P));
      return part;
    case NodeKind::kGaussSelfAdjoint:
      part.constant = selfadj_sum_transfer(m.n, P, m.sigma * m.sigma).apply(zero_moments(P));
      return part;
    case NodeKind::kGaussSum:
      part = compile_node(m.children[0], P, true);
      push_stage(part, gauss_sum_transfer(m.n, m.N, P, m.sigma * m.sigma));
      return part;
    case NodeKind::kSelfAdjSum:
      part = compile_node(m.children[0], P, false);
      push_stage(part, selfadj_sum_transfer(m.n, P, m.sigma * m.sigma));
      return part;
    case NodeKind::kSelfAdjProduct:
      part = compile_node(m.children[0], P, false);
      push_stage(part, selfadj_product_transfer(m.n, P));
      return part;
    case NodeKind::kScale:
      part = compile_node(m.children[0], P, false);
      push_stage(part, scale_transfer(P, m.factor));
      return part;
    case NodeKind::kChain: {
      part = compile_node(m.children[0], P, false);
      for (std::size_t i = 1; i < m.children.size(); ++i) {
        const ModelExpr& g = m.children[i];
        TransferMap stage = wishart_product_transfer(g.n, g.N, P, WishartInput::kR);
        if (g.sigma != 1) stage = compose(scale_transfer(P, g.sigma * g.sigma), stage);
        push_stage(part, stage);
      }
      return part;
    }
    case NodeKind::kCorrProduct: {
      Partial r = compile_node(m.children[0], P, false);
      Partial s = compile_node(m.children[1], P, false);
      if (r.constant && s.constant) {
        r.constant = wishart_product_transfer(m.n, m.N, P, WishartInput::kBoth).apply(
            combine_two_sided(*r.constant, *s.constant));
        return r;
      }
      if (s.constant) {
        push_stage(r, all_ones(*s.constant)
                          ? wishart_product_transfer(m.n, m.N, P, WishartInput::kR)
                          : fold_side(wishart_product_transfer(m.n, m.N, P, WishartInput::kBoth), WishartInput::kS,
                                      *s.constant));
        return r;
      }
      if (r.constant) {
        push_stage(s, all_ones(*r.constant)
                          ? wishart_product_transfer(m.n, m.N, P, WishartInput::kS)
                          : fold_side(wishart_product_transfer(m.n, m.N, P, WishartInput::kBoth), WishartInput::kR,
                                      *r.constant));
        return s;
      }
      if (m.children[0].kind != NodeKind::kDet || m.children[1].kind != NodeKind::kDet)
        throw ModelError("unsupported model: wprod with random factors on both sides needs two det(...) leaves");
      part.input.kind = ModelInput::Kind::kPair;
      part.input.names = {m.children[0].name, m.children[1].name};
      part.input.shapes = {{m.children[0].rows, m.children[0].cols}, {m.children[1].rows, m.children[1].cols}};
      part.input_basis = Basis::two_sided(P);
      part.stages.push_back(wishart_product_transfer(m.n, m.N, P, WishartInput::kBoth));
      return part;
    }
  }
  throw std::logic_error("unhandled model node");
}

}  // namespace

CompiledModel compile_stages(const ModelExpr& model, int max_weight) {
  if (max_weight < 1) throw std::invalid_argument("maximum weight must be at least 1");
  check_dimensions(model);
  Partial part = compile_node(model, max_weight, false);
  CompiledModel out;
  out.input = part.input;
  out.input_basis = part.input_basis;
  if (part.constant) {
    out.stages.push_back(constant_transfer(*part.constant, part.input_basis));
  } else if (part.stages.empty()) {
    out.stages.push_back(identity_transfer(part.input_basis));
  } else {
    out.stages = std::move(part.stages);
  }
  out.output_basis = out.stages.back().output_basis();
  return out;
}

TransferMap CompiledModel::combined() const {
  TransferMap map = stages.front();
  for (std::size_t i = 1; i < stages.size(); ++i) map = compose(stages[i], map);
  return map;
}

TransferMap compile(const ModelExpr& model, int max_weight) { return compile_stages(model, max_weight).combined(); }

}  // namespace gaussmom
