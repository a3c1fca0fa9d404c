#include "cmlab/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "cmlab/util/rng.hpp"

namespace cmlab::nn {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

Node& parent(Node& n, std::size_t i) { return *n.parents[i]; }

// c (r x m) += a (r x k) * b (k x m)
void gemm_nn(const Tensor& a, const Tensor& b, Tensor& c) {
  const std::size_t r = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < r; ++i) {
    double* ci = c.data() + i * m;
    const double* ai = a.data() + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ai[p];
      if (av == 0.0) continue;
      const double* bp = b.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) ci[j] += av * bp[j];
    }
  }
}

// c (r x m) += a (r x k) * b^T, b is (m x k)
void gemm_nt(const Tensor& a, const Tensor& b, Tensor& c) {
  const std::size_t r = a.rows(), k = a.cols(), m = b.rows();
  for (std::size_t i = 0; i < r; ++i) {
    const double* ai = a.data() + i * k;
    double* ci = c.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) {
      const double* bj = b.data() + j * k;
      double s = 0;
      for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
      ci[j] += s;
    }
  }
}

// c (k x m) += a^T * b, a is (r x k), b is (r x m)
void gemm_tn(const Tensor& a, const Tensor& b, Tensor& c) {
  const std::size_t r = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < r; ++i) {
    const double* ai = a.data() + i * k;
    const double* bi = b.data() + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ai[p];
      if (av == 0.0) continue;
      double* cp = c.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) cp[j] += av * bi[j];
    }
  }
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  Tensor out(a.rows(), b.cols());
  gemm_nn(a.value(), b.value(), out);
  return Var::make(std::move(out), {a, b}, [](Node& n) {
    Node& pa = parent(n, 0);
    Node& pb = parent(n, 1);
    if (pa.requires_grad) gemm_nt(n.grad, pb.value, pa.grad_buffer());
    if (pb.requires_grad) gemm_tn(pa.value, n.grad, pb.grad_buffer());
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  require(a.cols() == b.cols(), "matmul_nt: inner dimensions differ");
  Tensor out(a.rows(), b.rows());
  gemm_nt(a.value(), b.value(), out);
  return Var::make(std::move(out), {a, b}, [](Node& n) {
    Node& pa = parent(n, 0);
    Node& pb = parent(n, 1);
    if (pa.requires_grad) gemm_nn(n.grad, pb.value, pa.grad_buffer());
    if (pb.requires_grad) gemm_tn(n.grad, pa.value, pb.grad_buffer());
  });
}

Var add(const Var& a, const Var& b) {
  require(a.value().same_shape(b.value()), "add: shape mismatch");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return Var::make(std::move(out), {a, b}, [](Node& n) {
    for (std::size_t k = 0; k < 2; ++k) {
      Node& p = parent(n, k);
      if (!p.requires_grad) continue;
      Tensor& g = p.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
  });
}

Var sub(const Var& a, const Var& b) {
  require(a.value().same_shape(b.value()), "sub: shape mismatch");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return Var::make(std::move(out), {a, b}, [](Node& n) {
    Node& pa = parent(n, 0);
    Node& pb = parent(n, 1);
    if (pa.requires_grad) {
      Tensor& g = pa.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
    if (pb.requires_grad) {
      Tensor& g = pb.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= n.grad[i];
    }
  });
}

Var hadamard(const Var& a, const Var& b) {
  require(a.value().same_shape(b.value()), "hadamard: shape mismatch");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return Var::make(std::move(out), {a, b}, [](Node& n) {
    Node& pa = parent(n, 0);
    Node& pb = parent(n, 1);
    if (pa.requires_grad) {
      Tensor& g = pa.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * pb.value[i];
    }
    if (pb.requires_grad) {
      Tensor& g = pb.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * pa.value[i];
    }
  });
}

Var add_row(const Var& a, const Var& row) {
  require(row.rows() == 1 && row.cols() == a.cols(), "add_row: row must be 1 x cols(a)");
  Tensor out = a.value();
  const std::size_t c = out.cols();
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < c; ++j) out(i, j) += row.value()[j];
  return Var::make(std::move(out), {a, row}, [](Node& n) {
    Node& pa = parent(n, 0);
    Node& pr = parent(n, 1);
    if (pa.requires_grad) {
      Tensor& g = pa.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
    if (pr.requires_grad) {
      Tensor& g = pr.grad_buffer();
      const std::size_t c = n.grad.cols();
      for (std::size_t i = 0; i < n.grad.rows(); ++i)
        for (std::size_t j = 0; j < c; ++j) g[j] += n.grad(i, j);
    }
  });
}

Var scale(const Var& a, double s) {
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s;
  return Var::make(std::move(out), {a}, [s](Node& n) {
    Tensor& g = parent(n, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * n.grad[i];
  });
}

Var scale_by(const Var& a, const Var& scalar) {
  require(scalar.rows() == 1 && scalar.cols() == 1, "scale_by: scalar must be 1 x 1");
  const double s = scalar.value()[0];
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s;
  return Var::make(std::move(out), {a, scalar}, [](Node& n) {
    Node& pa = parent(n, 0);
    Node& ps = parent(n, 1);
    const double s = ps.value[0];
    if (pa.requires_grad) {
      Tensor& g = pa.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * n.grad[i];
    }
    if (ps.requires_grad) {
      double acc = 0;
      for (std::size_t i = 0; i < n.grad.size(); ++i) acc += n.grad[i] * pa.value[i];
      ps.grad_buffer()[0] += acc;
    }
  });
}

Var relu(const Var& a) {
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(0.0, out[i]);
  return Var::make(std::move(out), {a}, [](Node& n) {
    Node& p = parent(n, 0);
    Tensor& g = p.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (p.value[i] > 0.0) g[i] += n.grad[i];
  });
}

Var softmax_rows(const Var& a, bool causal) {
  const Tensor& x = a.value();
  Tensor out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const std::size_t limit = causal ? std::min(i + 1, x.cols()) : x.cols();
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < limit; ++j) m = std::max(m, x(i, j));
    double z = 0;
    for (std::size_t j = 0; j < limit; ++j) {
      out(i, j) = std::exp(x(i, j) - m);
      z += out(i, j);
    }
    for (std::size_t j = 0; j < limit; ++j) out(i, j) /= z;
  }
  return Var::make(std::move(out), {a}, [](Node& n) {
    Tensor& g = parent(n, 0).grad_buffer();
    const Tensor& y = n.value;
    for (std::size_t i = 0; i < y.rows(); ++i) {
      double dot = 0;
      for (std::size_t j = 0; j < y.cols(); ++j) dot += y(i, j) * n.grad(i, j);
      for (std::size_t j = 0; j < y.cols(); ++j) g(i, j) += y(i, j) * (n.grad(i, j) - dot);
    }
  });
}

Var layer_norm(const Var& a, const Var& gamma, const Var& beta, double eps) {
  const Tensor& x = a.value();
  const std::size_t r = x.rows(), c = x.cols();
  require(gamma.rows() == 1 && gamma.cols() == c && beta.rows() == 1 && beta.cols() == c,
          "layer_norm: gamma/beta must be 1 x cols");
  Tensor xhat(r, c);
  std::vector<double> inv_std(r);
  Tensor out(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    double mean = 0;
    for (std::size_t j = 0; j < c; ++j) mean += x(i, j);
    mean /= static_cast<double>(c);
    double var = 0;
    for (std::size_t j = 0; j < c; ++j) var += (x(i, j) - mean) * (x(i, j) - mean);
    var /= static_cast<double>(c);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < c; ++j) {
      xhat(i, j) = (x(i, j) - mean) * inv_std[i];
      out(i, j) = gamma.value()[j] * xhat(i, j) + beta.value()[j];
    }
  }
  return Var::make(std::move(out), {a, gamma, beta}, [xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& n) {
    Node& px = parent(n, 0);
    Node& pg = parent(n, 1);
    Node& pb = parent(n, 2);
    const std::size_t r = xhat.rows(), c = xhat.cols();
    if (pg.requires_grad) {
      Tensor& g = pg.grad_buffer();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g[j] += n.grad(i, j) * xhat(i, j);
    }
    if (pb.requires_grad) {
      Tensor& g = pb.grad_buffer();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g[j] += n.grad(i, j);
    }
    if (px.requires_grad) {
      Tensor& g = px.grad_buffer();
      const double inv_c = 1.0 / static_cast<double>(c);
      for (std::size_t i = 0; i < r; ++i) {
        double s1 = 0, s2 = 0;
        for (std::size_t j = 0; j < c; ++j) {
          const double dxhat = n.grad(i, j) * pg.value[j];
          s1 += dxhat;
          s2 += dxhat * xhat(i, j);
        }
        for (std::size_t j = 0; j < c; ++j) {
          const double dxhat = n.grad(i, j) * pg.value[j];
          g(i, j) += inv_std[i] * (dxhat - inv_c * s1 - xhat(i, j) * inv_c * s2);
        }
      }
    }
  });
}

Var gather_rows(const Var& table, std::span<const int> ids) {
  const Tensor& t = table.value();
  Tensor out(ids.size(), t.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= t.rows())
      throw std::invalid_argument("gather_rows: index " + std::to_string(ids[i]) + " out of range at position " +
                                  std::to_string(i));
    std::copy_n(t.row(static_cast<std::size_t>(ids[i])).data(), t.cols(), out.row(i).data());
  }
  return Var::make(std::move(out), {table}, [idx = std::vector<int>(ids.begin(), ids.end())](Node& n) {
    Tensor& g = parent(n, 0).grad_buffer();
    const std::size_t c = g.cols();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      double* dst = g.row(static_cast<std::size_t>(idx[i])).data();
      const double* src = n.grad.row(i).data();
      for (std::size_t j = 0; j < c; ++j) dst[j] += src[j];
    }
  });
}

Var slice_cols(const Var& a, std::size_t start, std::size_t len) {
  require(start + len <= a.cols(), "slice_cols: range exceeds columns");
  const Tensor& x = a.value();
  Tensor out(x.rows(), len);
  for (std::size_t i = 0; i < x.rows(); ++i) std::copy_n(x.row(i).data() + start, len, out.row(i).data());
  return Var::make(std::move(out), {a}, [start, len](Node& n) {
    Tensor& g = parent(n, 0).grad_buffer();
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < len; ++j) g(i, start + j) += n.grad(i, j);
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_cols: no inputs");
  const std::size_t r = parts[0].rows();
  std::size_t c = 0;
  for (const auto& p : parts) {
    require(p.rows() == r, "concat_cols: row counts differ");
    c += p.cols();
  }
  Tensor out(r, c);
  std::size_t off = 0;
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < r; ++i) std::copy_n(p.value().row(i).data(), p.cols(), out.row(i).data() + off);
    off += p.cols();
  }
  return Var::make(std::move(out), parts, [](Node& n) {
    std::size_t off = 0;
    for (auto& pp : n.parents) {
      const std::size_t pc = pp->value.cols();
      if (pp->requires_grad) {
        Tensor& g = pp->grad_buffer();
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < pc; ++j) g(i, j) += n.grad(i, off + j);
      }
      off += pc;
    }
  });
}

Var pad_rows(const Var& a, std::size_t total_rows, bool at_front) {
  require(total_rows >= a.rows(), "pad_rows: target shorter than input");
  const std::size_t shift = at_front ? total_rows - a.rows() : 0;
  Tensor out(total_rows, a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) std::copy_n(a.value().row(i).data(), a.cols(), out.row(i + shift).data());
  return Var::make(std::move(out), {a}, [shift](Node& n) {
    Tensor& g = parent(n, 0).grad_buffer();
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) += n.grad(i + shift, j);
  });
}

Var dropout(const Var& a, double p, Rng& rng, bool training) {
  require(p >= 0.0 && p < 1.0, "dropout: p must lie in [0, 1)");
  if (!training || p == 0.0) return a;
  const double keep = 1.0 / (1.0 - p);
  Tensor mask(a.rows(), a.cols());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = rng.uniform() < p ? 0.0 : keep;
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return Var::make(std::move(out), {a}, [mask = std::move(mask)](Node& n) {
    Tensor& g = parent(n, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += mask[i] * n.grad[i];
  });
}

Tensor log_softmax_rows(const Tensor& logits) {
  Tensor out(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < logits.cols(); ++j) m = std::max(m, logits(i, j));
    double z = 0;
    for (std::size_t j = 0; j < logits.cols(); ++j) z += std::exp(logits(i, j) - m);
    const double lz = m + std::log(z);
    for (std::size_t j = 0; j < logits.cols(); ++j) out(i, j) = logits(i, j) - lz;
  }
  return out;
}

Var cross_entropy_sum(const Var& logits, std::span<const int> targets) {
  require(targets.size() == logits.rows(), "cross_entropy_sum: one target per row");
  Tensor logp = log_softmax_rows(logits.value());
  double loss = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0) continue;
    require(static_cast<std::size_t>(targets[i]) < logits.cols(), "cross_entropy_sum: target out of range");
    loss -= logp(i, static_cast<std::size_t>(targets[i]));
  }
  return Var::make(Tensor(1, 1, loss), {logits},
                   [logp = std::move(logp), t = std::vector<int>(targets.begin(), targets.end())](Node& n) {
                     Tensor& g = parent(n, 0).grad_buffer();
                     const double up = n.grad[0];
                     for (std::size_t i = 0; i < t.size(); ++i) {
                       if (t[i] < 0) continue;
                       for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) += up * std::exp(logp(i, j));
                       g(i, static_cast<std::size_t>(t[i])) -= up;
                     }
                   });
}

Var mean_rows(const Var& a, std::size_t count) {
  require(count > 0 && count <= a.rows(), "mean_rows: count out of range");
  Tensor out(1, a.cols());
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += a.value()(i, j);
  const double inv = 1.0 / static_cast<double>(count);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] *= inv;
  return Var::make(std::move(out), {a}, [count, inv](Node& n) {
    Tensor& g = parent(n, 0).grad_buffer();
    for (std::size_t i = 0; i < count; ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) += inv * n.grad[j];
  });
}

Var sum_all(const Var& a) {
  double s = 0;
  for (double v : a.value().values()) s += v;
  return Var::make(Tensor(1, 1, s), {a}, [](Node& n) {
    Tensor& g = parent(n, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[0];
  });
}

Var weighted_sum(const Var& a, const Tensor& weights) {
  require(a.value().same_shape(weights), "weighted_sum: shape mismatch");
  double s = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) s += a.value()[i] * weights[i];
  return Var::make(Tensor(1, 1, s), {a}, [weights](Node& n) {
    Tensor& g = parent(n, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[0] * weights[i];
  });
}

}  // namespace cmlab::nn
