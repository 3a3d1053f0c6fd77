#include "actir/tape.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace actir {

namespace {

// C (m_dim x n_dim) += op(A) * op(B); a flag transposes the physical array.
// Loop orders are specialized so the hot layouts stay cache-friendly.
void gemm_acc(double* c, const double* a, bool ta, const double* b, bool tb,
              std::size_t m_dim, std::size_t n_dim, std::size_t k_dim) {
  if (!ta && !tb) {
    for (std::size_t m = 0; m < m_dim; ++m) {
      double* crow = c + m * n_dim;
      const double* arow = a + m * k_dim;
      for (std::size_t k = 0; k < k_dim; ++k) {
        const double amk = arow[k];
        const double* brow = b + k * n_dim;
        for (std::size_t n = 0; n < n_dim; ++n) crow[n] += amk * brow[n];
      }
    }
  } else if (!ta && tb) {
    for (std::size_t m = 0; m < m_dim; ++m) {
      const double* arow = a + m * k_dim;
      double* crow = c + m * n_dim;
      for (std::size_t n = 0; n < n_dim; ++n) {
        const double* brow = b + n * k_dim;
        double s = 0.0;
        for (std::size_t k = 0; k < k_dim; ++k) s += arow[k] * brow[k];
        crow[n] += s;
      }
    }
  } else if (ta && !tb) {
    for (std::size_t k = 0; k < k_dim; ++k) {
      const double* arow = a + k * m_dim;
      const double* brow = b + k * n_dim;
      for (std::size_t m = 0; m < m_dim; ++m) {
        const double akm = arow[m];
        double* crow = c + m * n_dim;
        for (std::size_t n = 0; n < n_dim; ++n) crow[n] += akm * brow[n];
      }
    }
  } else {
    for (std::size_t m = 0; m < m_dim; ++m) {
      for (std::size_t n = 0; n < n_dim; ++n) {
        double s = 0.0;
        for (std::size_t k = 0; k < k_dim; ++k) s += a[k * m_dim + m] * b[n * k_dim + k];
        c[m * n_dim + n] += s;
      }
    }
  }
}

void require_matrix(const Tensor& t, const char* who) {
  if (!t.is_matrix()) {
    throw std::invalid_argument(std::string(who) + ": expected a matrix, got shape " + t.shape_str());
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* who) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(who) + ": shape mismatch " + a.shape_str() + " vs " +
                                b.shape_str());
  }
}

// Row-wise softmax with max subtraction.
Tensor softmax_rows(const Tensor& logits) {
  Tensor p = Tensor::zeros(logits.shape);
  const std::size_t n = logits.rows(), k = logits.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double mx = logits.at(i, 0);
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, logits.at(i, j));
    double denom = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      p.at(i, j) = std::exp(logits.at(i, j) - mx);
      denom += p.at(i, j);
    }
    for (std::size_t j = 0; j < k; ++j) p.at(i, j) /= denom;
  }
  return p;
}

void check_labels(const Tensor& logits, const std::vector<int>& labels, const char* who) {
  if (labels.size() != logits.rows()) {
    throw std::invalid_argument(std::string(who) + ": " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(logits.rows()) + " rows");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= logits.cols()) {
      throw std::invalid_argument(std::string(who) + ": class index " + std::to_string(y) +
                                  " out of range [0, " + std::to_string(logits.cols()) + ")");
    }
  }
}

// group id -> mean of the rows carrying it.
std::map<int, std::vector<double>> group_means(const Tensor& x, const std::vector<int>& groups) {
  const std::size_t n = x.rows(), k = x.cols();
  std::map<int, std::pair<std::size_t, std::vector<double>>> acc;
  for (std::size_t i = 0; i < n; ++i) {
    auto& slot = acc[groups[i]];
    if (slot.second.empty()) slot.second.assign(k, 0.0);
    slot.first++;
    for (std::size_t j = 0; j < k; ++j) slot.second[j] += x.at(i, j);
  }
  std::map<int, std::vector<double>> means;
  for (auto& [g, slot] : acc) {
    for (double& v : slot.second) v /= static_cast<double>(slot.first);
    means[g] = std::move(slot.second);
  }
  return means;
}

}  // namespace

int Tape::check(Var v) const {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw std::logic_error("Tape: invalid node handle");
  }
  return v.id;
}

Var Tape::push(OpKind kind, std::vector<int> in, Tensor value,
               std::function<void(Tape&, int)> back) {
  Node node;
  node.kind = kind;
  node.in = std::move(in);
  node.grad = Tensor::zeros(value.shape);
  node.value = std::move(value);
  node.back = std::move(back);
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Tensor& Tape::grad_acc(int id) {
  nodes_[id].touched = true;
  return nodes_[id].grad;
}

Var Tape::leaf(Tensor value) { return push(OpKind::Leaf, {}, std::move(value), nullptr); }

Var Tape::constant(Tensor value) { return push(OpKind::Constant, {}, std::move(value), nullptr); }

Var Tape::matmul(Var a, Var b, bool trans_a, bool trans_b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require_matrix(A, "matmul");
  require_matrix(B, "matmul");
  const std::size_t m = trans_a ? A.cols() : A.rows();
  const std::size_t k = trans_a ? A.rows() : A.cols();
  const std::size_t kb = trans_b ? B.cols() : B.rows();
  const std::size_t n = trans_b ? B.rows() : B.cols();
  if (k != kb) {
    throw std::invalid_argument("matmul: inner dimensions disagree, " + A.shape_str() +
                                (trans_a ? "^T" : "") + " * " + B.shape_str() +
                                (trans_b ? "^T" : ""));
  }
  Tensor out = Tensor::zeros({m, n});
  gemm_acc(out.values.data(), A.values.data(), trans_a, B.values.data(), trans_b, m, n, k);
  return push(OpKind::MatMul, {a.id, b.id}, std::move(out), [trans_a, trans_b](Tape& t, int self) {
    const Tensor& g = t.nodes_[self].grad;
    const int ia = t.nodes_[self].in[0];
    const int ib = t.nodes_[self].in[1];
    const Tensor& av = t.nodes_[ia].value;
    const Tensor& bv = t.nodes_[ib].value;
    const std::size_t m = g.rows(), n = g.cols();
    const std::size_t k = trans_a ? av.rows() : av.cols();
    Tensor& da = t.grad_acc(ia);
    Tensor& db = t.grad_acc(ib);
    if (!trans_a) {
      gemm_acc(da.values.data(), g.values.data(), false, bv.values.data(), !trans_b, m, k, n);
    } else {
      gemm_acc(da.values.data(), bv.values.data(), trans_b, g.values.data(), true, k, m, n);
    }
    if (!trans_b) {
      gemm_acc(db.values.data(), av.values.data(), !trans_a, g.values.data(), false, k, n, m);
    } else {
      gemm_acc(db.values.data(), g.values.data(), true, av.values.data(), trans_a, n, k, m);
    }
  });
}

Var Tape::add(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require_same_shape(A, B, "add");
  Tensor out = A;
  for (std::size_t i = 0; i < out.numel(); ++i) out.values[i] += B.values[i];
  return push(OpKind::Add, {a.id, b.id}, std::move(out), [](Tape& t, int self) {
    const Tensor& g = t.nodes_[self].grad;
    Tensor& da = t.grad_acc(t.nodes_[self].in[0]);
    Tensor& db = t.grad_acc(t.nodes_[self].in[1]);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      da.values[i] += g.values[i];
      db.values[i] += g.values[i];
    }
  });
}

Var Tape::sub(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require_same_shape(A, B, "sub");
  Tensor out = A;
  for (std::size_t i = 0; i < out.numel(); ++i) out.values[i] -= B.values[i];
  return push(OpKind::Sub, {a.id, b.id}, std::move(out), [](Tape& t, int self) {
    const Tensor& g = t.nodes_[self].grad;
    Tensor& da = t.grad_acc(t.nodes_[self].in[0]);
    Tensor& db = t.grad_acc(t.nodes_[self].in[1]);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      da.values[i] += g.values[i];
      db.values[i] -= g.values[i];
    }
  });
}

Var Tape::mul(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require_same_shape(A, B, "mul");
  Tensor out = A;
  for (std::size_t i = 0; i < out.numel(); ++i) out.values[i] *= B.values[i];
  return push(OpKind::Mul, {a.id, b.id}, std::move(out), [](Tape& t, int self) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& av = t.nodes_[t.nodes_[self].in[0]].value;
    const Tensor& bv = t.nodes_[t.nodes_[self].in[1]].value;
    Tensor& da = t.grad_acc(t.nodes_[self].in[0]);
    Tensor& db = t.grad_acc(t.nodes_[self].in[1]);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      da.values[i] += g.values[i] * bv.values[i];
      db.values[i] += g.values[i] * av.values[i];
    }
  });
}

Var Tape::add_row_bias(Var x, Var bias) {
  const Tensor& X = value(x);
  const Tensor& B = value(bias);
  require_matrix(X, "add_row_bias");
  if (B.shape.size() != 1 || B.shape[0] != X.cols()) {
    throw std::invalid_argument("add_row_bias: bias shape " + B.shape_str() +
                                " does not match row width " + std::to_string(X.cols()));
  }
  Tensor out = X;
  const std::size_t n = X.rows(), k = X.cols();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) out.at(i, j) += B.values[j];
  return push(OpKind::AddRowBias, {x.id, bias.id}, std::move(out), [](Tape& t, int self) {
    const Tensor& g = t.nodes_[self].grad;
    Tensor& dx = t.grad_acc(t.nodes_[self].in[0]);
    Tensor& db = t.grad_acc(t.nodes_[self].in[1]);
    const std::size_t n = g.rows(), k = g.cols();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        dx.at(i, j) += g.at(i, j);
        db.values[j] += g.at(i, j);
      }
  });
}

Var Tape::relu(Var x) {
  Tensor out = value(x);
  for (double& v : out.values) v = v > 0.0 ? v : 0.0;
  return push(OpKind::Relu, {x.id}, std::move(out), [](Tape& t, int self) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& xv = t.nodes_[t.nodes_[self].in[0]].value;
    Tensor& dx = t.grad_acc(t.nodes_[self].in[0]);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      if (xv.values[i] > 0.0) dx.values[i] += g.values[i];
    }
  });
}

Var Tape::scale(Var x, double c) {
  Tensor out = value(x);
  for (double& v : out.values) v *= c;
  return push(OpKind::Scale, {x.id}, std::move(out), [c](Tape& t, int self) {
    const Tensor& g = t.nodes_[self].grad;
    Tensor& dx = t.grad_acc(t.nodes_[self].in[0]);
    for (std::size_t i = 0; i < g.numel(); ++i) dx.values[i] += c * g.values[i];
  });
}

Var Tape::softmax_xent_mean(Var logits, std::vector<int> labels) {
  const Tensor& L = value(logits);
  require_matrix(L, "softmax_xent_mean");
  check_labels(L, labels, "softmax_xent_mean");
  Tensor p = softmax_rows(L);
  const std::size_t n = L.rows();
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // -log p[y] through logsumexp keeps the saturated case exact.
    double mx = L.at(i, 0);
    for (std::size_t j = 1; j < L.cols(); ++j) mx = std::max(mx, L.at(i, j));
    double lse = 0.0;
    for (std::size_t j = 0; j < L.cols(); ++j) lse += std::exp(L.at(i, j) - mx);
    loss += std::log(lse) + mx - L.at(i, static_cast<std::size_t>(labels[i]));
  }
  loss /= static_cast<double>(n);
  return push(OpKind::SoftmaxXentMean, {logits.id}, Tensor::from_vector({loss}),
              [p = std::move(p), labels = std::move(labels)](Tape& t, int self) {
                const double g = t.nodes_[self].grad.values[0];
                Tensor& dl = t.grad_acc(t.nodes_[self].in[0]);
                const std::size_t n = p.rows(), k = p.cols();
                const double inv_n = 1.0 / static_cast<double>(n);
                for (std::size_t i = 0; i < n; ++i)
                  for (std::size_t j = 0; j < k; ++j) {
                    double r = p.at(i, j) - (static_cast<std::size_t>(labels[i]) == j ? 1.0 : 0.0);
                    dl.at(i, j) += g * inv_n * r;
                  }
              });
}

Var Tape::softmax_residual(Var logits, std::vector<int> labels) {
  const Tensor& L = value(logits);
  require_matrix(L, "softmax_residual");
  check_labels(L, labels, "softmax_residual");
  Tensor p = softmax_rows(L);
  Tensor out = p;
  for (std::size_t i = 0; i < L.rows(); ++i) out.at(i, static_cast<std::size_t>(labels[i])) -= 1.0;
  return push(OpKind::SoftmaxResidual, {logits.id}, std::move(out),
              [p = std::move(p)](Tape& t, int self) {
                const Tensor& g = t.nodes_[self].grad;
                Tensor& dl = t.grad_acc(t.nodes_[self].in[0]);
                const std::size_t n = p.rows(), k = p.cols();
                for (std::size_t i = 0; i < n; ++i) {
                  double inner = 0.0;
                  for (std::size_t j = 0; j < k; ++j) inner += p.at(i, j) * g.at(i, j);
                  for (std::size_t j = 0; j < k; ++j) {
                    dl.at(i, j) += p.at(i, j) * (g.at(i, j) - inner);
                  }
                }
              });
}

Var Tape::group_center(Var x, std::vector<int> groups) {
  const Tensor& X = value(x);
  require_matrix(X, "group_center");
  if (groups.size() != X.rows()) {
    throw std::invalid_argument("group_center: " + std::to_string(groups.size()) +
                                " group ids for " + std::to_string(X.rows()) + " rows");
  }
  auto means = group_means(X, groups);
  Tensor out = X;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto& m = means.at(groups[i]);
    for (std::size_t j = 0; j < X.cols(); ++j) out.at(i, j) -= m[j];
  }
  return push(OpKind::GroupCenter, {x.id}, std::move(out),
              [groups = std::move(groups)](Tape& t, int self) {
                // The centering projector is symmetric, so the pullback is
                // the same centering applied to the incoming gradient.
                const Tensor& g = t.nodes_[self].grad;
                Tensor& dx = t.grad_acc(t.nodes_[self].in[0]);
                auto means = group_means(g, groups);
                for (std::size_t i = 0; i < g.rows(); ++i) {
                  const auto& m = means.at(groups[i]);
                  for (std::size_t j = 0; j < g.cols(); ++j) dx.at(i, j) += g.at(i, j) - m[j];
                }
              });
}

Var Tape::mean_rows(Var x) {
  const Tensor& X = value(x);
  require_matrix(X, "mean_rows");
  const std::size_t n = X.rows(), k = X.cols();
  Tensor out = Tensor::zeros({k});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) out.values[j] += X.at(i, j);
  for (double& v : out.values) v /= static_cast<double>(n);
  return push(OpKind::MeanRows, {x.id}, std::move(out), [](Tape& t, int self) {
    const Tensor& g = t.nodes_[self].grad;
    Tensor& dx = t.grad_acc(t.nodes_[self].in[0]);
    const std::size_t n = dx.rows(), k = dx.cols();
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < k; ++j) dx.at(i, j) += g.values[j] * inv_n;
  });
}

Var Tape::l1_norm(Var x) {
  const Tensor& X = value(x);
  double s = 0.0;
  for (double v : X.values) s += std::abs(v);
  return push(OpKind::L1Norm, {x.id}, Tensor::from_vector({s}), [](Tape& t, int self) {
    const double g = t.nodes_[self].grad.values[0];
    const Tensor& xv = t.nodes_[t.nodes_[self].in[0]].value;
    Tensor& dx = t.grad_acc(t.nodes_[self].in[0]);
    for (std::size_t i = 0; i < xv.numel(); ++i) {
      if (xv.values[i] > 0.0) dx.values[i] += g;
      else if (xv.values[i] < 0.0) dx.values[i] -= g;
    }
  });
}

Var Tape::sum_squares(Var x) {
  const Tensor& X = value(x);
  double s = 0.0;
  for (double v : X.values) s += v * v;
  return push(OpKind::SumSquares, {x.id}, Tensor::from_vector({s}), [](Tape& t, int self) {
    const double g = t.nodes_[self].grad.values[0];
    const Tensor& xv = t.nodes_[t.nodes_[self].in[0]].value;
    Tensor& dx = t.grad_acc(t.nodes_[self].in[0]);
    for (std::size_t i = 0; i < xv.numel(); ++i) dx.values[i] += 2.0 * g * xv.values[i];
  });
}

Var Tape::dot(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require_same_shape(A, B, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < A.numel(); ++i) s += A.values[i] * B.values[i];
  return push(OpKind::Dot, {a.id, b.id}, Tensor::from_vector({s}), [](Tape& t, int self) {
    const double g = t.nodes_[self].grad.values[0];
    const Tensor& av = t.nodes_[t.nodes_[self].in[0]].value;
    const Tensor& bv = t.nodes_[t.nodes_[self].in[1]].value;
    Tensor& da = t.grad_acc(t.nodes_[self].in[0]);
    Tensor& db = t.grad_acc(t.nodes_[self].in[1]);
    for (std::size_t i = 0; i < av.numel(); ++i) {
      da.values[i] += g * bv.values[i];
      db.values[i] += g * av.values[i];
    }
  });
}

Var Tape::row_scale(Var x, Tensor s) {
  const Tensor& X = value(x);
  require_matrix(X, "row_scale");
  if (s.shape.size() != 1 || s.shape[0] != X.rows()) {
    throw std::invalid_argument("row_scale: scale shape " + s.shape_str() +
                                " does not match row count " + std::to_string(X.rows()));
  }
  Tensor out = X;
  for (std::size_t i = 0; i < X.rows(); ++i)
    for (std::size_t j = 0; j < X.cols(); ++j) out.at(i, j) *= s.values[i];
  return push(OpKind::RowScale, {x.id}, std::move(out), [s = std::move(s)](Tape& t, int self) {
    const Tensor& g = t.nodes_[self].grad;
    Tensor& dx = t.grad_acc(t.nodes_[self].in[0]);
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) dx.at(i, j) += g.at(i, j) * s.values[i];
  });
}

Var Tape::mask(Var x, Tensor mask01) {
  const Tensor& X = value(x);
  require_same_shape(X, mask01, "mask");
  Tensor out = X;
  for (std::size_t i = 0; i < out.numel(); ++i) out.values[i] *= mask01.values[i];
  return push(OpKind::MaskConst, {x.id}, std::move(out),
              [m = std::move(mask01)](Tape& t, int self) {
                const Tensor& g = t.nodes_[self].grad;
                Tensor& dx = t.grad_acc(t.nodes_[self].in[0]);
                for (std::size_t i = 0; i < g.numel(); ++i) dx.values[i] += g.values[i] * m.values[i];
              });
}

void Tape::backward(Var output) {
  const int out = check(output);
  if (!nodes_[out].value.is_scalar()) {
    throw std::invalid_argument("backward: output must be a scalar, got shape " +
                                nodes_[out].value.shape_str());
  }
  for (Node& n : nodes_) {
    std::fill(n.grad.values.begin(), n.grad.values.end(), 0.0);
    n.touched = false;
  }
  nodes_[out].grad.values[0] = 1.0;
  nodes_[out].touched = true;
  for (int i = out; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.touched && n.back) n.back(*this, i);
  }
}

double grad_check(const std::function<Var(Tape&, const std::vector<Var>&)>& loss_fn,
                  const std::vector<Tensor>& params, double step) {
  if (step <= 0.0) throw std::invalid_argument("grad_check: step must be positive");

  Tape tape;
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const Tensor& p : params) vars.push_back(tape.leaf(p));
  Var out = loss_fn(tape, vars);
  if (!tape.value(out).is_scalar()) {
    throw std::invalid_argument("grad_check: loss_fn must return a scalar");
  }
  tape.backward(out);
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (Var v : vars) analytic.push_back(tape.grad(v));

  auto eval = [&](const std::vector<Tensor>& ps) {
    Tape t;
    std::vector<Var> vs;
    vs.reserve(ps.size());
    for (const Tensor& p : ps) vs.push_back(t.leaf(p));
    return t.value(loss_fn(t, vs)).values[0];
  };

  std::vector<Tensor> probe = params;
  double max_err = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    for (std::size_t j = 0; j < probe[i].numel(); ++j) {
      const double orig = probe[i].values[j];
      probe[i].values[j] = orig + step;
      const double fp = eval(probe);
      probe[i].values[j] = orig - step;
      const double fm = eval(probe);
      probe[i].values[j] = orig;
      const double fd = (fp - fm) / (2.0 * step);
      const double an = analytic[i].values[j];
      const double err = std::abs(an - fd) / (std::abs(an) + std::abs(fd) + 1e-12);
      max_err = std::max(max_err, err);
    }
  }
  return max_err;
}

}  // namespace actir
