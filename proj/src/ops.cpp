#include "aceformer/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace aceformer::ad {

namespace {

void require_2d(const char* op, const Tensor& t) {
  if (t.shape().size() != 2) {
    throw std::invalid_argument(std::string(op) + ": expected a 2-D tensor, got shape " +
                                shape_str(t.shape()));
  }
}

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": incompatible shapes " + shape_str(a.shape()) +
                              " and " + shape_str(b.shape()));
}

// rows/cols view of a 1-D (single row) or 2-D tensor
std::pair<std::size_t, std::size_t> row_view(const char* op, const Tensor& t) {
  if (t.shape().size() == 1) return {1, t.shape()[0]};
  if (t.shape().size() == 2) return {t.shape()[0], t.shape()[1]};
  throw std::invalid_argument(std::string(op) + ": expected a 1-D or 2-D tensor, got shape " +
                              shape_str(t.shape()));
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_2d("matmul", a);
  require_2d("matmul", b);
  if (a.shape()[1] != b.shape()[0]) shape_error("matmul", a, b);
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];

  std::vector<double> out(m * n, 0.0);
  const auto& A = a.data();
  const auto& B = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t t = 0; t < k; ++t) {
      const double av = A[i * k + t];
      if (av == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += av * B[t * n + j];
    }
  }
  return make_op("matmul", {m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    const auto& g = self.grad;
    if (pa.requires_grad) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t t = 0; t < k; ++t) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * pb.data[t * n + j];
          pa.grad[i * k + t] += acc;
        }
      }
    }
    if (pb.requires_grad) {
      for (std::size_t t = 0; t < k; ++t) {
        for (std::size_t j = 0; j < n; ++j) {
          double acc = 0.0;
          for (std::size_t i = 0; i < m; ++i) acc += pa.data[i * k + t] * g[i * n + j];
          pb.grad[t * n + j] += acc;
        }
      }
    }
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error("add", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  return make_op("add", a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (int p = 0; p < 2; ++p) {
      Node& par = *self.parents[static_cast<std::size_t>(p)];
      if (!par.requires_grad) continue;
      for (std::size_t i = 0; i < self.grad.size(); ++i) par.grad[i] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error("sub", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  return make_op("sub", a.shape(), std::move(out), {a, b}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    if (pa.requires_grad) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i];
    }
    if (pb.requires_grad) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) pb.grad[i] -= self.grad[i];
    }
  });
}

Tensor add_rowvec(const Tensor& a, const Tensor& bias) {
  require_2d("add_rowvec", a);
  if (bias.shape().size() != 1 || bias.shape()[0] != a.shape()[1]) {
    shape_error("add_rowvec", a, bias);
  }
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = a.data()[i * n + j] + bias.data()[j];
  }
  return make_op("add_rowvec", {m, n}, std::move(out), {a, bias}, [m, n](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    if (pa.requires_grad) {
      for (std::size_t i = 0; i < m * n; ++i) pa.grad[i] += self.grad[i];
    }
    if (pb.requires_grad) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) pb.grad[j] += self.grad[i * n + j];
      }
    }
  });
}

Tensor scale(const Tensor& a, double c) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * a.data()[i];
  return make_op("scale", a.shape(), std::move(out), {a}, [c](Node& self) {
    Node& pa = *self.parents[0];
    if (!pa.requires_grad) return;
    for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += c * self.grad[i];
  });
}

Tensor conv1d(const Tensor& x, const Tensor& kernel) {
  require_2d("conv1d", x);
  if (kernel.shape().size() != 3) {
    throw std::invalid_argument("conv1d: kernel must be (k, c_in, c_out), got shape " +
                                shape_str(kernel.shape()));
  }
  const std::size_t len = x.shape()[0], ci = x.shape()[1];
  const std::size_t k = kernel.shape()[0], co = kernel.shape()[2];
  if (kernel.shape()[1] != ci) shape_error("conv1d", x, kernel);
  if (k % 2 == 0) {
    throw std::invalid_argument("conv1d: kernel width must be odd, got " + std::to_string(k));
  }
  const std::size_t off = k / 2;

  std::vector<double> out(len * co, 0.0);
  const auto& X = x.data();
  const auto& W = kernel.data();
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t d = 0; d < k; ++d) {
      const std::size_t s = t + d;
      if (s < off || s - off >= len) continue;  // zero padding
      const std::size_t src = s - off;
      for (std::size_t c = 0; c < ci; ++c) {
        const double xv = X[src * ci + c];
        if (xv == 0.0) continue;
        const std::size_t wbase = (d * ci + c) * co;
        for (std::size_t o = 0; o < co; ++o) out[t * co + o] += xv * W[wbase + o];
      }
    }
  }
  return make_op("conv1d", {len, co}, std::move(out), {x, kernel},
                 [len, ci, k, co, off](Node& self) {
                   Node& px = *self.parents[0];
                   Node& pw = *self.parents[1];
                   const auto& g = self.grad;
                   for (std::size_t t = 0; t < len; ++t) {
                     for (std::size_t d = 0; d < k; ++d) {
                       const std::size_t s = t + d;
                       if (s < off || s - off >= len) continue;
                       const std::size_t src = s - off;
                       for (std::size_t c = 0; c < ci; ++c) {
                         const std::size_t wbase = (d * ci + c) * co;
                         if (px.requires_grad) {
                           double acc = 0.0;
                           for (std::size_t o = 0; o < co; ++o) {
                             acc += g[t * co + o] * pw.data[wbase + o];
                           }
                           px.grad[src * ci + c] += acc;
                         }
                         if (pw.requires_grad) {
                           const double xv = px.data[src * ci + c];
                           for (std::size_t o = 0; o < co; ++o) {
                             pw.grad[wbase + o] += xv * g[t * co + o];
                           }
                         }
                       }
                     }
                   }
                 });
}

Tensor maxpool2d(const Tensor& x, std::size_t kh, std::size_t kw) {
  require_2d("maxpool2d", x);
  const std::size_t h = x.shape()[0], w = x.shape()[1];
  if (kh == 0 || kw == 0 || h % kh != 0 || w % kw != 0) {
    throw std::invalid_argument("maxpool2d: window " + std::to_string(kh) + "x" +
                                std::to_string(kw) + " does not tile shape " +
                                shape_str(x.shape()));
  }
  const std::size_t oh = h / kh, ow = w / kw;
  std::vector<double> out(oh * ow);
  std::vector<std::size_t> argmax(oh * ow);
  const auto& X = x.data();
  for (std::size_t i = 0; i < oh; ++i) {
    for (std::size_t j = 0; j < ow; ++j) {
      double best = -std::numeric_limits<double>::infinity();
      std::size_t best_at = 0;
      for (std::size_t di = 0; di < kh; ++di) {
        for (std::size_t dj = 0; dj < kw; ++dj) {
          const std::size_t at = (i * kh + di) * w + (j * kw + dj);
          if (X[at] > best) {  // strict: first occurrence keeps the gradient
            best = X[at];
            best_at = at;
          }
        }
      }
      out[i * ow + j] = best;
      argmax[i * ow + j] = best_at;
    }
  }
  return make_op("maxpool2d", {oh, ow}, std::move(out), {x},
                 [argmax = std::move(argmax)](Node& self) {
                   Node& px = *self.parents[0];
                   if (!px.requires_grad) return;
                   for (std::size_t i = 0; i < self.grad.size(); ++i) {
                     px.grad[argmax[i]] += self.grad[i];
                   }
                 });
}

Tensor softmax(const Tensor& x) {
  const auto [rows, cols] = row_view("softmax", x);
  if (cols == 0) throw std::invalid_argument("softmax: empty rows");
  std::vector<double> out(x.size());
  const auto& X = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t base = r * cols;
    double mx = X[base];
    for (std::size_t j = 1; j < cols; ++j) mx = std::max(mx, X[base + j]);
    double denom = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      out[base + j] = std::exp(X[base + j] - mx);
      denom += out[base + j];
    }
    for (std::size_t j = 0; j < cols; ++j) out[base + j] /= denom;
  }
  return make_op("softmax", x.shape(), std::move(out), {x}, [rows = rows, cols = cols](Node& self) {
    Node& px = *self.parents[0];
    if (!px.requires_grad) return;
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t base = r * cols;
      double dot = 0.0;
      for (std::size_t j = 0; j < cols; ++j) dot += self.grad[base + j] * self.data[base + j];
      for (std::size_t j = 0; j < cols; ++j) {
        px.grad[base + j] += self.data[base + j] * (self.grad[base + j] - dot);
      }
    }
  });
}

Tensor elu(const Tensor& x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = x.data()[i];
    out[i] = v > 0.0 ? v : std::expm1(v);
  }
  return make_op("elu", x.shape(), std::move(out), {x}, [](Node& self) {
    Node& px = *self.parents[0];
    if (!px.requires_grad) return;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double d = px.data[i] > 0.0 ? 1.0 : self.data[i] + 1.0;
      px.grad[i] += d * self.grad[i];
    }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta) {
  const auto [rows, cols] = row_view("layer_norm", x);
  if (gamma.shape().size() != 1 || gamma.shape()[0] != cols) shape_error("layer_norm", x, gamma);
  if (beta.shape().size() != 1 || beta.shape()[0] != cols) shape_error("layer_norm", x, beta);

  std::vector<double> out(x.size());
  std::vector<double> xhat(x.size());
  std::vector<double> inv_std(rows);
  const auto& X = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t base = r * cols;
    double mean = 0.0;
    for (std::size_t j = 0; j < cols; ++j) mean += X[base + j];
    mean /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      const double d = X[base + j] - mean;
      var += d * d;
    }
    var /= static_cast<double>(cols);
    const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    inv_std[r] = inv;
    for (std::size_t j = 0; j < cols; ++j) {
      xhat[base + j] = (X[base + j] - mean) * inv;
      out[base + j] = gamma.data()[j] * xhat[base + j] + beta.data()[j];
    }
  }
  return make_op(
      "layer_norm", x.shape(), std::move(out), {x, gamma, beta},
      [rows = rows, cols = cols, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
        Node& px = *self.parents[0];
        Node& pg = *self.parents[1];
        Node& pb = *self.parents[2];
        const auto& g = self.grad;
        const double nd = static_cast<double>(cols);
        for (std::size_t r = 0; r < rows; ++r) {
          const std::size_t base = r * cols;
          if (pg.requires_grad || pb.requires_grad) {
            for (std::size_t j = 0; j < cols; ++j) {
              if (pg.requires_grad) pg.grad[j] += g[base + j] * xhat[base + j];
              if (pb.requires_grad) pb.grad[j] += g[base + j];
            }
          }
          if (px.requires_grad) {
            double s1 = 0.0, s2 = 0.0;
            for (std::size_t j = 0; j < cols; ++j) {
              const double q = g[base + j] * pg.data[j];
              s1 += q;
              s2 += q * xhat[base + j];
            }
            for (std::size_t j = 0; j < cols; ++j) {
              const double q = g[base + j] * pg.data[j];
              px.grad[base + j] += inv_std[r] * (q - s1 / nd - xhat[base + j] * s2 / nd);
            }
          }
        }
      });
}

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
  if (pred.shape() != target.shape()) shape_error("mse_loss", pred, target);
  if (pred.size() == 0) throw std::invalid_argument("mse_loss: empty tensors");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.data()[i] - target.data()[i];
    acc += d * d;
  }
  acc /= static_cast<double>(pred.size());
  return make_op("mse_loss", {1}, {acc}, {pred, target}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    const double g = self.grad[0];
    const double n = static_cast<double>(pa.data.size());
    for (std::size_t i = 0; i < pa.data.size(); ++i) {
      const double d = 2.0 * (pa.data[i] - pb.data[i]) / n;
      if (pa.requires_grad) pa.grad[i] += g * d;
      if (pb.requires_grad) pb.grad[i] -= g * d;
    }
  });
}

Tensor slice(const Tensor& x, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1) {
  require_2d("slice", x);
  const std::size_t h = x.shape()[0], w = x.shape()[1];
  if (r0 >= r1 || r1 > h || c0 >= c1 || c1 > w) {
    throw std::invalid_argument("slice: window [" + std::to_string(r0) + "," +
                                std::to_string(r1) + ")x[" + std::to_string(c0) + "," +
                                std::to_string(c1) + ") outside shape " + shape_str(x.shape()));
  }
  const std::size_t oh = r1 - r0, ow = c1 - c0;
  std::vector<double> out(oh * ow);
  for (std::size_t i = 0; i < oh; ++i) {
    for (std::size_t j = 0; j < ow; ++j) out[i * ow + j] = x.data()[(r0 + i) * w + (c0 + j)];
  }
  return make_op("slice", {oh, ow}, std::move(out), {x}, [r0, c0, w, oh, ow](Node& self) {
    Node& px = *self.parents[0];
    if (!px.requires_grad) return;
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        px.grad[(r0 + i) * w + (c0 + j)] += self.grad[i * ow + j];
      }
    }
  });
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
  require_2d("concat_rows", a);
  require_2d("concat_rows", b);
  if (a.shape()[1] != b.shape()[1]) shape_error("concat_rows", a, b);
  const std::size_t ma = a.shape()[0], mb = b.shape()[0], n = a.shape()[1];
  std::vector<double> out;
  out.reserve((ma + mb) * n);
  out.insert(out.end(), a.data().begin(), a.data().end());
  out.insert(out.end(), b.data().begin(), b.data().end());
  return make_op("concat_rows", {ma + mb, n}, std::move(out), {a, b}, [ma, n](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    const std::size_t split = ma * n;
    if (pa.requires_grad) {
      for (std::size_t i = 0; i < split; ++i) pa.grad[i] += self.grad[i];
    }
    if (pb.requires_grad) {
      for (std::size_t i = split; i < self.grad.size(); ++i) pb.grad[i - split] += self.grad[i];
    }
  });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  require_2d("concat_cols", a);
  require_2d("concat_cols", b);
  if (a.shape()[0] != b.shape()[0]) shape_error("concat_cols", a, b);
  const std::size_t m = a.shape()[0], na = a.shape()[1], nb = b.shape()[1];
  std::vector<double> out(m * (na + nb));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < na; ++j) out[i * (na + nb) + j] = a.data()[i * na + j];
    for (std::size_t j = 0; j < nb; ++j) out[i * (na + nb) + na + j] = b.data()[i * nb + j];
  }
  return make_op("concat_cols", {m, na + nb}, std::move(out), {a, b}, [m, na, nb](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    for (std::size_t i = 0; i < m; ++i) {
      if (pa.requires_grad) {
        for (std::size_t j = 0; j < na; ++j) {
          pa.grad[i * na + j] += self.grad[i * (na + nb) + j];
        }
      }
      if (pb.requires_grad) {
        for (std::size_t j = 0; j < nb; ++j) {
          pb.grad[i * nb + j] += self.grad[i * (na + nb) + na + j];
        }
      }
    }
  });
}

Tensor transpose2d(const Tensor& x) {
  require_2d("transpose2d", x);
  const std::size_t h = x.shape()[0], w = x.shape()[1];
  std::vector<double> out(h * w);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) out[j * h + i] = x.data()[i * w + j];
  }
  return make_op("transpose2d", {w, h}, std::move(out), {x}, [h, w](Node& self) {
    Node& px = *self.parents[0];
    if (!px.requires_grad) return;
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t j = 0; j < w; ++j) px.grad[i * w + j] += self.grad[j * h + i];
    }
  });
}

Tensor mean_axis(const Tensor& x, int axis) {
  require_2d("mean_axis", x);
  if (axis != 0 && axis != 1) {
    throw std::invalid_argument("mean_axis: axis must be 0 or 1, got " + std::to_string(axis));
  }
  const std::size_t h = x.shape()[0], w = x.shape()[1];
  if (axis == 0) {
    std::vector<double> out(w, 0.0);
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t j = 0; j < w; ++j) out[j] += x.data()[i * w + j];
    }
    for (double& v : out) v /= static_cast<double>(h);
    return make_op("mean_axis", {w}, std::move(out), {x}, [h, w](Node& self) {
      Node& px = *self.parents[0];
      if (!px.requires_grad) return;
      const double inv = 1.0 / static_cast<double>(h);
      for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t j = 0; j < w; ++j) px.grad[i * w + j] += inv * self.grad[j];
      }
    });
  }
  std::vector<double> out(h, 0.0);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) out[i] += x.data()[i * w + j];
    out[i] /= static_cast<double>(w);
  }
  return make_op("mean_axis", {h}, std::move(out), {x}, [h, w](Node& self) {
    Node& px = *self.parents[0];
    if (!px.requires_grad) return;
    const double inv = 1.0 / static_cast<double>(w);
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t j = 0; j < w; ++j) px.grad[i * w + j] += inv * self.grad[i];
    }
  });
}

Tensor sum_all(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  return make_op("sum_all", {1}, {acc}, {x}, [](Node& self) {
    Node& px = *self.parents[0];
    if (!px.requires_grad) return;
    for (double& g : px.grad) g += self.grad[0];
  });
}

Tensor reshape(const Tensor& x, std::vector<std::size_t> shape) {
  if (shape_size(shape) != x.size()) {
    throw std::invalid_argument("reshape: shape " + shape_str(shape) + " does not hold " +
                                std::to_string(x.size()) + " values");
  }
  std::vector<double> out = x.data();
  return make_op("reshape", std::move(shape), std::move(out), {x}, [](Node& self) {
    Node& px = *self.parents[0];
    if (!px.requires_grad) return;
    for (std::size_t i = 0; i < self.grad.size(); ++i) px.grad[i] += self.grad[i];
  });
}

Tensor gather_rows(const Tensor& x, std::vector<std::size_t> indices) {
  require_2d("gather_rows", x);
  const std::size_t m = x.shape()[0], n = x.shape()[1];
  for (std::size_t r : indices) {
    if (r >= m) {
      throw std::invalid_argument("gather_rows: row " + std::to_string(r) +
                                  " outside shape " + shape_str(x.shape()));
    }
  }
  const std::size_t k = indices.size();
  std::vector<double> out(k * n);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t j = 0; j < n; ++j) out[r * n + j] = x.data()[indices[r] * n + j];
  }
  return make_op("gather_rows", {k, n}, std::move(out), {x},
                 [indices = std::move(indices), n](Node& self) {
                   Node& px = *self.parents[0];
                   if (!px.requires_grad) return;
                   for (std::size_t r = 0; r < indices.size(); ++r) {
                     for (std::size_t j = 0; j < n; ++j) {
                       px.grad[indices[r] * n + j] += self.grad[r * n + j];
                     }
                   }
                 });
}

Tensor scatter_rows(const Tensor& rows, std::vector<std::size_t> indices, std::size_t m) {
  require_2d("scatter_rows", rows);
  const std::size_t k = rows.shape()[0], n = rows.shape()[1];
  if (indices.size() != k) {
    throw std::invalid_argument("scatter_rows: " + std::to_string(indices.size()) +
                                " indices for " + std::to_string(k) + " rows");
  }
  for (std::size_t r : indices) {
    if (r >= m) {
      throw std::invalid_argument("scatter_rows: row " + std::to_string(r) + " outside " +
                                  std::to_string(m) + " rows");
    }
  }
  std::vector<double> out(m * n, 0.0);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t j = 0; j < n; ++j) out[indices[r] * n + j] += rows.data()[r * n + j];
  }
  return make_op("scatter_rows", {m, n}, std::move(out), {rows},
                 [indices = std::move(indices), n](Node& self) {
                   Node& pr = *self.parents[0];
                   if (!pr.requires_grad) return;
                   for (std::size_t r = 0; r < indices.size(); ++r) {
                     for (std::size_t j = 0; j < n; ++j) {
                       pr.grad[r * n + j] += self.grad[indices[r] * n + j];
                     }
                   }
                 });
}

Tensor repeat_row(const Tensor& v, std::size_t m) {
  if (v.shape().size() != 1) {
    throw std::invalid_argument("repeat_row: expected a 1-D tensor, got shape " +
                                shape_str(v.shape()));
  }
  const std::size_t n = v.shape()[0];
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = v.data()[j];
  }
  return make_op("repeat_row", {m, n}, std::move(out), {v}, [m, n](Node& self) {
    Node& pv = *self.parents[0];
    if (!pv.requires_grad) return;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) pv.grad[j] += self.grad[i * n + j];
    }
  });
}

Tensor straight_through(
    const Tensor& x, const std::function<std::vector<double>(const std::vector<double>&)>& fn) {
  std::vector<double> out = fn(x.data());
  if (out.size() != x.size()) {
    throw std::invalid_argument("straight_through: transform changed the element count from " +
                                std::to_string(x.size()) + " to " + std::to_string(out.size()));
  }
  return make_op("straight_through", x.shape(), std::move(out), {x}, [](Node& self) {
    Node& px = *self.parents[0];
    if (!px.requires_grad) return;
    for (std::size_t i = 0; i < self.grad.size(); ++i) px.grad[i] += self.grad[i];
  });
}

}  // namespace aceformer::ad
