#include "ertte/tape.hpp"

#include <cmath>

#include "ertte/errors.hpp"

namespace ertte::nn {

NodeRef Tape::push(Mat value, std::function<void(Tape&)> back) {
  Node node;
  node.value = std::move(value);
  if (recording_) node.back = std::move(back);
  nodes_.push_back(std::move(node));
  return static_cast<NodeRef>(nodes_.size() - 1);
}

NodeRef Tape::input(Mat v) { return push(std::move(v), {}); }

NodeRef Tape::param(Parameter& p) {
  Parameter* ptr = &p;
  NodeRef r = push(p.value, {});
  if (recording_)
    nodes_[static_cast<std::size_t>(r)].back = [ptr, r](Tape& t) { ptr->grad += t.grad(r); };
  return r;
}

NodeRef Tape::rows(Parameter& table, std::vector<int> indices) {
  Mat out(static_cast<long>(indices.size()), table.value.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const int idx = indices[i];
    if (idx < 0 || idx >= table.value.rows())
      throw DataError("embedding index " + std::to_string(idx) + " out of vocabulary '" +
                      table.name + "' (" + std::to_string(table.value.rows()) + ")");
    out.row(static_cast<long>(i)) = table.value.row(idx);
  }
  Parameter* ptr = &table;
  NodeRef r = push(std::move(out), {});
  if (recording_) {
    nodes_[static_cast<std::size_t>(r)].back = [ptr, r, idx = std::move(indices)](Tape& t) {
      const Mat& g = t.grad(r);
      for (std::size_t i = 0; i < idx.size(); ++i)
        ptr->grad.row(idx[i]) += g.row(static_cast<long>(i));
    };
  }
  return r;
}

NodeRef Tape::matmul(NodeRef a, NodeRef b) {
  NodeRef r = push(value(a) * value(b), {});
  if (recording_)
    nodes_[static_cast<std::size_t>(r)].back = [a, b, r](Tape& t) {
      t.grad(a) += t.grad(r) * t.value(b).transpose();
      t.grad(b) += t.value(a).transpose() * t.grad(r);
    };
  return r;
}

NodeRef Tape::transpose(NodeRef a) {
  NodeRef r = push(value(a).transpose(), {});
  if (recording_)
    nodes_[static_cast<std::size_t>(r)].back = [a, r](Tape& t) {
      t.grad(a) += t.grad(r).transpose();
    };
  return r;
}

NodeRef Tape::add(NodeRef a, NodeRef b) {
  NodeRef r = push(value(a) + value(b), {});
  if (recording_)
    nodes_[static_cast<std::size_t>(r)].back = [a, b, r](Tape& t) {
      t.grad(a) += t.grad(r);
      t.grad(b) += t.grad(r);
    };
  return r;
}

NodeRef Tape::sub(NodeRef a, NodeRef b) {
  NodeRef r = push(value(a) - value(b), {});
  if (recording_)
    nodes_[static_cast<std::size_t>(r)].back = [a, b, r](Tape& t) {
      t.grad(a) += t.grad(r);
      t.grad(b) -= t.grad(r);
    };
  return r;
}

NodeRef Tape::cmul(NodeRef a, NodeRef b) {
  NodeRef r = push(value(a).cwiseProduct(value(b)), {});
  if (recording_)
    nodes_[static_cast<std::size_t>(r)].back = [a, b, r](Tape& t) {
      t.grad(a) += t.grad(r).cwiseProduct(t.value(b));
      t.grad(b) += t.grad(r).cwiseProduct(t.value(a));
    };
  return r;
}

NodeRef Tape::scale(NodeRef a, double s) {
  NodeRef r = push(value(a) * s, {});
  if (recording_)
    nodes_[static_cast<std::size_t>(r)].back = [a, r, s](Tape& t) { t.grad(a) += t.grad(r) * s; };
  return r;
}

NodeRef Tape::add_row(NodeRef a, NodeRef row) {
  Mat out = value(a);
  out.rowwise() += value(row).row(0);
  NodeRef r = push(std::move(out), {});
  if (recording_)
    nodes_[static_cast<std::size_t>(r)].back = [a, row, r](Tape& t) {
      t.grad(a) += t.grad(r);
      t.grad(row).row(0) += t.grad(r).colwise().sum();
    };
  return r;
}

NodeRef Tape::mul_row(NodeRef a, NodeRef row) {
  Mat out = value(a);
  out.array().rowwise() *= value(row).row(0).array();
  NodeRef r = push(std::move(out), {});
  if (recording_)
    nodes_[static_cast<std::size_t>(r)].back = [a, row, r](Tape& t) {
      Mat g = t.grad(r);
      g.array().rowwise() *= t.value(row).row(0).array();
      t.grad(a) += g;
      t.grad(row).row(0) += t.grad(r).cwiseProduct(t.value(a)).colwise().sum();
    };
  return r;
}

NodeRef Tape::relu(NodeRef a) {
  NodeRef r = push(value(a).cwiseMax(0.0), {});
  if (recording_)
    nodes_[static_cast<std::size_t>(r)].back = [a, r](Tape& t) {
      t.grad(a) += t.grad(r).cwiseProduct(
          (t.value(a).array() > 0.0).cast<double>().matrix());
    };
  return r;
}

NodeRef Tape::exp(NodeRef a) {
  NodeRef r = push(value(a).array().exp().matrix(), {});
  if (recording_)
    nodes_[static_cast<std::size_t>(r)].back = [a, r](Tape& t) {
      t.grad(a) += t.grad(r).cwiseProduct(t.value(r));
    };
  return r;
}

NodeRef Tape::abs(NodeRef a) {
  NodeRef r = push(value(a).cwiseAbs(), {});
  if (recording_)
    nodes_[static_cast<std::size_t>(r)].back = [a, r](Tape& t) {
      t.grad(a) += t.grad(r).cwiseProduct(t.value(a).array().sign().matrix());
    };
  return r;
}

NodeRef Tape::row_softmax(NodeRef a) {
  Mat out = value(a);
  for (long i = 0; i < out.rows(); ++i) {
    const double mx = out.row(i).maxCoeff();
    out.row(i) = (out.row(i).array() - mx).exp();
    out.row(i) /= out.row(i).sum();
  }
  NodeRef r = push(std::move(out), {});
  if (recording_)
    nodes_[static_cast<std::size_t>(r)].back = [a, r](Tape& t) {
      const Mat& y = t.value(r);
      const Mat& gy = t.grad(r);
      Mat gx(y.rows(), y.cols());
      for (long i = 0; i < y.rows(); ++i) {
        const double inner = gy.row(i).dot(y.row(i));
        gx.row(i) = (gy.row(i).array() - inner) * y.row(i).array();
      }
      t.grad(a) += gx;
    };
  return r;
}

NodeRef Tape::row_normalize_l2(NodeRef a) {
  Mat out = value(a);
  for (long i = 0; i < out.rows(); ++i) {
    const double n = std::max(out.row(i).norm(), 1e-12);
    out.row(i) /= n;
  }
  NodeRef r = push(std::move(out), {});
  if (recording_)
    nodes_[static_cast<std::size_t>(r)].back = [a, r](Tape& t) {
      const Mat& x = t.value(a);
      const Mat& y = t.value(r);
      const Mat& gy = t.grad(r);
      Mat gx(x.rows(), x.cols());
      for (long i = 0; i < x.rows(); ++i) {
        const double n = std::max(x.row(i).norm(), 1e-12);
        const double inner = gy.row(i).dot(y.row(i));
        gx.row(i) = (gy.row(i) - inner * y.row(i)) / n;
      }
      t.grad(a) += gx;
    };
  return r;
}

NodeRef Tape::layer_norm_rows(NodeRef a, double eps) {
  const Mat& x = value(a);
  const auto c = static_cast<double>(x.cols());
  Mat out(x.rows(), x.cols());
  std::vector<double> inv_std(static_cast<std::size_t>(x.rows()));
  for (long i = 0; i < x.rows(); ++i) {
    const double mean = x.row(i).mean();
    const double var = (x.row(i).array() - mean).square().sum() / c;
    const double s = 1.0 / std::sqrt(var + eps);
    inv_std[static_cast<std::size_t>(i)] = s;
    out.row(i) = (x.row(i).array() - mean) * s;
  }
  NodeRef r = push(std::move(out), {});
  if (recording_)
    nodes_[static_cast<std::size_t>(r)].back = [a, r, inv_std = std::move(inv_std)](Tape& t) {
      const Mat& y = t.value(r);
      const Mat& gy = t.grad(r);
      const auto cols = static_cast<double>(y.cols());
      Mat gx(y.rows(), y.cols());
      for (long i = 0; i < y.rows(); ++i) {
        const double gmean = gy.row(i).mean();
        const double gymean = gy.row(i).cwiseProduct(y.row(i)).sum() / cols;
        gx.row(i) = (gy.row(i).array() - gmean - y.row(i).array() * gymean) *
                    inv_std[static_cast<std::size_t>(i)];
      }
      t.grad(a) += gx;
    };
  return r;
}

NodeRef Tape::concat_cols(const std::vector<NodeRef>& parts) {
  long cols = 0;
  const long rows = value(parts.front()).rows();
  for (NodeRef p : parts) cols += value(p).cols();
  Mat out(rows, cols);
  long at = 0;
  for (NodeRef p : parts) {
    out.middleCols(at, value(p).cols()) = value(p);
    at += value(p).cols();
  }
  NodeRef r = push(std::move(out), {});
  if (recording_)
    nodes_[static_cast<std::size_t>(r)].back = [parts, r](Tape& t) {
      long at2 = 0;
      for (NodeRef p : parts) {
        const long c = t.value(p).cols();
        t.grad(p) += t.grad(r).middleCols(at2, c);
        at2 += c;
      }
    };
  return r;
}

NodeRef Tape::concat_rows(const std::vector<NodeRef>& parts) {
  long rows = 0;
  const long cols = value(parts.front()).cols();
  for (NodeRef p : parts) rows += value(p).rows();
  Mat out(rows, cols);
  long at = 0;
  for (NodeRef p : parts) {
    out.middleRows(at, value(p).rows()) = value(p);
    at += value(p).rows();
  }
  NodeRef r = push(std::move(out), {});
  if (recording_)
    nodes_[static_cast<std::size_t>(r)].back = [parts, r](Tape& t) {
      long at2 = 0;
      for (NodeRef p : parts) {
        const long n = t.value(p).rows();
        t.grad(p) += t.grad(r).middleRows(at2, n);
        at2 += n;
      }
    };
  return r;
}

NodeRef Tape::slice_cols(NodeRef a, long first, long count) {
  NodeRef r = push(value(a).middleCols(first, count), {});
  if (recording_)
    nodes_[static_cast<std::size_t>(r)].back = [a, r, first, count](Tape& t) {
      t.grad(a).middleCols(first, count) += t.grad(r);
    };
  return r;
}

NodeRef Tape::mean_rows(NodeRef a) {
  const auto n = static_cast<double>(value(a).rows());
  NodeRef r = push(value(a).colwise().mean(), {});
  if (recording_)
    nodes_[static_cast<std::size_t>(r)].back = [a, r, n](Tape& t) {
      t.grad(a) += (t.grad(r) / n).replicate(t.value(a).rows(), 1);
    };
  return r;
}

NodeRef Tape::mean_all(NodeRef a) {
  const auto n = static_cast<double>(value(a).size());
  NodeRef r = push(Mat::Constant(1, 1, value(a).mean()), {});
  if (recording_)
    nodes_[static_cast<std::size_t>(r)].back = [a, r, n](Tape& t) {
      t.grad(a).array() += t.grad(r)(0, 0) / n;
    };
  return r;
}

NodeRef Tape::sum_all(NodeRef a) {
  NodeRef r = push(Mat::Constant(1, 1, value(a).sum()), {});
  if (recording_)
    nodes_[static_cast<std::size_t>(r)].back = [a, r](Tape& t) {
      t.grad(a).array() += t.grad(r)(0, 0);
    };
  return r;
}

NodeRef Tape::pick(NodeRef a, long row, long col) {
  NodeRef r = push(Mat::Constant(1, 1, value(a)(row, col)), {});
  if (recording_)
    nodes_[static_cast<std::size_t>(r)].back = [a, r, row, col](Tape& t) {
      t.grad(a)(row, col) += t.grad(r)(0, 0);
    };
  return r;
}

NodeRef Tape::huber(NodeRef a, double delta) {
  const Mat& x = value(a);
  Mat out(x.rows(), x.cols());
  for (long i = 0; i < x.size(); ++i) {
    const double v = x(i);
    out(i) = std::abs(v) <= delta ? 0.5 * v * v : delta * (std::abs(v) - 0.5 * delta);
  }
  NodeRef r = push(std::move(out), {});
  if (recording_)
    nodes_[static_cast<std::size_t>(r)].back = [a, r, delta](Tape& t) {
      const Mat& xv = t.value(a);
      Mat d(xv.rows(), xv.cols());
      for (long i = 0; i < xv.size(); ++i) {
        const double v = xv(i);
        d(i) = std::abs(v) <= delta ? v : delta * (v > 0.0 ? 1.0 : -1.0);
      }
      t.grad(a) += t.grad(r).cwiseProduct(d);
    };
  return r;
}

NodeRef Tape::info_nce(NodeRef similarities, double tau) {
  if (tau <= 0.0) throw ConfigError("InfoNCE temperature must be positive");
  const Mat& s = value(similarities);
  const long n = s.rows();
  // Row softmax of S/tau, computed once and shared with the backward pass.
  Mat soft(n, n);
  double loss = 0.0;
  for (long i = 0; i < n; ++i) {
    const Eigen::RowVectorXd scaled = s.row(i) / tau;
    const double mx = scaled.maxCoeff();
    const Eigen::RowVectorXd e = (scaled.array() - mx).exp();
    const double z = e.sum();
    soft.row(i) = e / z;
    loss += std::log(z) + mx - scaled(i);  // logsumexp - S_ii/tau
  }
  loss /= static_cast<double>(n);
  NodeRef r = push(Mat::Constant(1, 1, loss), {});
  if (recording_)
    nodes_[static_cast<std::size_t>(r)].back =
        [similarities, r, tau, n, soft = std::move(soft)](Tape& t) {
          const double g = t.grad(r)(0, 0) / (static_cast<double>(n) * tau);
          Mat gs = soft * g;
          for (long i = 0; i < n; ++i) gs(i, i) -= g;
          t.grad(similarities) += gs;
        };
  return r;
}

void Tape::backward(NodeRef loss) {
  if (!recording_) throw StateError("backward on a non-recording tape");
  for (auto& node : nodes_) node.grad = Mat::Zero(node.value.rows(), node.value.cols());
  grad(loss)(0, 0) = 1.0;
  for (auto i = static_cast<long>(nodes_.size()) - 1; i >= 0; --i) {
    auto& node = nodes_[static_cast<std::size_t>(i)];
    if (node.back) node.back(*this);
  }
}

}  // namespace ertte::nn
