#include "slpinn/net.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "slpinn/autodiff.hpp"
#include "slpinn/error.hpp"

namespace slpinn {

namespace {

constexpr std::size_t kChunk = 256;

// Flat bundle slots: 0 value, 1 + i first partial, 4 + packed(i, k) second partial.
constexpr int slot_first(int i) { return 1 + i; }
constexpr int slot_second(int i, int k) { return 4 + static_cast<int>(packed_index(i, k)); }

int fan_in_of(const NetworkParams& p, std::size_t layer) {
    return layer == 0 ? p.input_dim : p.layer_widths[layer - 1];
}

void check_point(const NetworkParams& params, std::size_t size) {
    if (static_cast<int>(size) != params.input_dim) {
        throw DimensionError("network expects " + std::to_string(params.input_dim) +
                             " inputs, got " + std::to_string(size));
    }
}

}  // namespace

NetworkParams NetworkParams::zeros(Architecture arch, int input_dim, std::vector<int> widths) {
    if (input_dim < 1 || input_dim > kMaxInputs) {
        throw DimensionError("input_dim must be 1..3, got " + std::to_string(input_dim));
    }
    if (widths.empty()) throw DimensionError("at least one hidden layer required");
    if (arch == Architecture::TwoLayer && widths.size() != 1) {
        throw DimensionError("two-layer network takes exactly one hidden width");
    }
    for (int w : widths) {
        if (w < 1) throw DimensionError("hidden widths must be >= 1");
    }
    NetworkParams p;
    p.architecture = arch;
    p.input_dim = input_dim;
    p.layer_widths = std::move(widths);
    for (std::size_t l = 0; l < p.layer_widths.size(); ++l) {
        p.weights.emplace_back(Eigen::MatrixXd::Zero(p.layer_widths[l], fan_in_of(p, l)));
        p.biases.emplace_back(Eigen::VectorXd::Zero(p.layer_widths[l]));
    }
    p.output_weights = Eigen::VectorXd::Zero(p.layer_widths.back());
    return p;
}

std::size_t NetworkParams::parameter_count() const {
    std::size_t n = static_cast<std::size_t>(output_weights.size());
    for (std::size_t l = 0; l < weights.size(); ++l) {
        n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
    }
    return n;
}

Eigen::VectorXd NetworkParams::flatten() const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        out.segment(k, weights[l].size()) = weights[l].reshaped();
        k += weights[l].size();
        out.segment(k, biases[l].size()) = biases[l];
        k += biases[l].size();
    }
    out.segment(k, output_weights.size()) = output_weights;
    return out;
}

void NetworkParams::assign(const Eigen::VectorXd& flat) {
    if (static_cast<std::size_t>(flat.size()) != parameter_count()) {
        throw DimensionError("flat parameter vector has " + std::to_string(flat.size()) +
                             " entries, expected " + std::to_string(parameter_count()));
    }
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        weights[l].reshaped() = flat.segment(k, weights[l].size());
        k += weights[l].size();
        biases[l] = flat.segment(k, biases[l].size());
        k += biases[l].size();
    }
    output_weights = flat.segment(k, output_weights.size());
}

void NetworkParams::validate() const {
    if (input_dim < 1 || input_dim > kMaxInputs) throw DimensionError("input_dim must be 1..3");
    if (layer_widths.empty()) throw DimensionError("no hidden layers");
    if (architecture == Architecture::TwoLayer && layer_widths.size() != 1) {
        throw DimensionError("two-layer network takes exactly one hidden width");
    }
    if (weights.size() != layer_widths.size() || biases.size() != layer_widths.size()) {
        throw DimensionError("layer count mismatch");
    }
    for (std::size_t l = 0; l < layer_widths.size(); ++l) {
        if (layer_widths[l] < 1) throw DimensionError("hidden widths must be >= 1");
        if (weights[l].rows() != layer_widths[l] || weights[l].cols() != fan_in_of(*this, l) ||
            biases[l].size() != layer_widths[l]) {
            throw DimensionError("layer " + std::to_string(l) + " has inconsistent shape");
        }
        if (!weights[l].allFinite() || !biases[l].allFinite()) {
            throw DomainError("non-finite parameter in layer " + std::to_string(l));
        }
    }
    if (output_weights.size() != layer_widths.back()) throw DimensionError("output layer shape");
    if (!output_weights.allFinite()) throw DomainError("non-finite output weight");
}

double DerivativeBundle::second(int i, int k) const { return d2[packed_index(i, k)]; }

BundleVector DerivativeBundle::flat() const {
    BundleVector v{};
    v[0] = value;
    for (int i = 0; i < 3; ++i) v[slot_first(i)] = d1[i];
    for (int j = 0; j < 6; ++j) v[4 + j] = d2[j];
    return v;
}

DerivativeBundle DerivativeBundle::from_flat(int dim, const BundleVector& v) {
    DerivativeBundle b;
    b.dim = dim;
    b.value = v[0];
    for (int i = 0; i < 3; ++i) b.d1[i] = v[slot_first(i)];
    for (int j = 0; j < 6; ++j) b.d2[j] = v[4 + j];
    return b;
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

SigmoidDerivatives sigmoid_derivatives(double z) {
    const double s = sigmoid(z);
    const double s1 = s * (1.0 - s);
    return {s, s1, s1 * (1.0 - 2.0 * s), s1 * (1.0 - 6.0 * s1)};
}

NetworkParams init_params(std::uint64_t seed, Architecture arch, int input_dim,
                          std::vector<int> widths) {
    NetworkParams p = NetworkParams::zeros(arch, input_dim, std::move(widths));
    std::mt19937_64 rng(seed);
    auto fill = [&rng](auto& m, int fan_in) {
        std::uniform_real_distribution<double> dist(-1.0 / std::sqrt(fan_in), 1.0 / std::sqrt(fan_in));
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
    };
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        fill(p.weights[l], fan_in_of(p, l));
        fill(p.biases[l], fan_in_of(p, l));
    }
    fill(p.output_weights, p.layer_widths.back());
    return p;
}

DerivativeBundle eval_network(const NetworkParams& params, std::span<const double> point) {
    check_point(params, point.size());
    Point p{};
    std::copy(point.begin(), point.end(), p.begin());
    BatchEvaluation batch(params, std::span<const Point>(&p, 1));
    return batch.bundles().front();
}

Eigen::MatrixXd param_gradient_of_bundle(const NetworkParams& params, std::span<const double> point) {
    check_point(params, point.size());
    Point p{};
    std::copy(point.begin(), point.end(), p.begin());
    BatchEvaluation batch(params, std::span<const Point>(&p, 1));
    const auto n = static_cast<Eigen::Index>(params.parameter_count());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, kBundleSize);
    for (int e = 0; e < kBundleSize; ++e) {
        BundleVector adj{};
        adj[e] = 1.0;
        Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
        batch.backward(std::span<const BundleVector>(&adj, 1), g);
        out.col(e) = g;
    }
    return out;
}

// ---------------------------------------------------------------------------
// BatchEvaluation

BatchEvaluation::BatchEvaluation(const NetworkParams& params, std::span<const Point> points)
    : params_(params), points_(points.begin(), points.end()) {
    params_.validate();
    const int d = params_.input_dim;
    components_.push_back(0);
    for (int i = 0; i < d; ++i) components_.push_back(slot_first(i));
    for (int i = 0; i < d; ++i) {
        for (int k = i; k < d; ++k) components_.push_back(slot_second(i, k));
    }
    bundles_.assign(points_.size(), DerivativeBundle{});
    for (auto& b : bundles_) b.dim = d;
    if (params_.architecture == Architecture::TwoLayer) {
        forward_two_layer();
    } else {
        forward_deep();
    }
}

void BatchEvaluation::backward(std::span<const BundleVector> adjoints,
                               Eigen::Ref<Eigen::VectorXd> grad) const {
    if (adjoints.size() != points_.size()) throw DimensionError("adjoint count mismatch");
    if (static_cast<std::size_t>(grad.size()) != params_.parameter_count()) {
        throw DimensionError("gradient vector has wrong size");
    }
    if (params_.architecture == Architecture::TwoLayer) {
        backward_two_layer(adjoints, grad);
    } else {
        backward_deep(adjoints, grad);
    }
}

void BatchEvaluation::forward_two_layer() {
    const int d = params_.input_dim;
    const Eigen::MatrixXd& W = params_.weights[0];
    const Eigen::VectorXd& b = params_.biases[0];
    const Eigen::VectorXd& c = params_.output_weights;
    for (std::size_t n = 0; n < points_.size(); ++n) {
        const Point& p = points_[n];
        DerivativeBundle& out = bundles_[n];
        for (Eigen::Index j = 0; j < W.rows(); ++j) {
            double z = b[j];
            for (int i = 0; i < d; ++i) z += W(j, i) * p[i];
            const SigmoidDerivatives sd = sigmoid_derivatives(z);
            const double cj = c[j];
            out.value += cj * sd.s;
            for (int i = 0; i < d; ++i) {
                out.d1[i] += cj * sd.s1 * W(j, i);
                for (int k = i; k < d; ++k) out.d2[packed_index(i, k)] += cj * sd.s2 * W(j, i) * W(j, k);
            }
        }
    }
}

void BatchEvaluation::backward_two_layer(std::span<const BundleVector> adjoints,
                                         Eigen::Ref<Eigen::VectorXd> grad) const {
    const int d = params_.input_dim;
    const Eigen::MatrixXd& W = params_.weights[0];
    const Eigen::VectorXd& b = params_.biases[0];
    const Eigen::VectorXd& c = params_.output_weights;
    const Eigen::Index width = W.rows();
    const Eigen::Index off_b = W.size();
    const Eigen::Index off_c = off_b + width;
    for (std::size_t n = 0; n < points_.size(); ++n) {
        const Point& p = points_[n];
        const BundleVector& a = adjoints[n];
        for (Eigen::Index j = 0; j < width; ++j) {
            double z = b[j];
            for (int i = 0; i < d; ++i) z += W(j, i) * p[i];
            const SigmoidDerivatives sd = sigmoid_derivatives(z);
            double q1 = 0.0;
            double q2 = 0.0;
            std::array<double, 3> r{};
            for (int i = 0; i < d; ++i) {
                q1 += a[slot_first(i)] * W(j, i);
                for (int k = i; k < d; ++k) {
                    const double ah = a[slot_second(i, k)];
                    q2 += ah * W(j, i) * W(j, k);
                    r[i] += ah * W(j, k);
                    r[k] += ah * W(j, i);
                }
            }
            const double cj = c[j];
            grad[off_c + j] += a[0] * sd.s + q1 * sd.s1 + q2 * sd.s2;
            const double gb = cj * (a[0] * sd.s1 + q1 * sd.s2 + q2 * sd.s3);
            grad[off_b + j] += gb;
            for (int m = 0; m < d; ++m) {
                grad[m * width + j] += p[m] * gb + cj * (sd.s1 * a[slot_first(m)] + sd.s2 * r[m]);
            }
        }
    }
}

// Deep network: each component matrix holds one bundle slot of every unit for a
// chunk of points. For slot e of the input jet H and pre-activation Z = W H + b:
//   value:  A = sigma(Z)
//   first:  A_i = s1 * Z_i
//   second: A_ik = s2 * Z_i * Z_k + s1 * Z_ik
void BatchEvaluation::forward_deep() {
    const int d = params_.input_dim;
    const std::size_t L = params_.layer_widths.size();
    const std::size_t nc = components_.size();
    std::vector<int> pos(kBundleSize, -1);
    for (std::size_t c = 0; c < nc; ++c) pos[components_[c]] = static_cast<int>(c);

    for (std::size_t begin = 0; begin < points_.size(); begin += kChunk) {
        Chunk chunk;
        chunk.begin = begin;
        chunk.size = std::min(kChunk, points_.size() - begin);
        const auto N = static_cast<Eigen::Index>(chunk.size);

        std::vector<Eigen::MatrixXd> H(nc, Eigen::MatrixXd::Zero(d, N));
        for (Eigen::Index n = 0; n < N; ++n) {
            for (int i = 0; i < d; ++i) {
                H[0](i, n) = points_[begin + n][i];
                H[pos[slot_first(i)]](i, n) = 1.0;
            }
        }
        for (std::size_t l = 0; l < L; ++l) {
            Layer layer;
            layer.input = H;
            layer.pre.resize(nc);
            for (std::size_t c = 0; c < nc; ++c) layer.pre[c].noalias() = params_.weights[l] * H[c];
            layer.pre[0].colwise() += params_.biases[l];

            const Eigen::Index w = params_.layer_widths[l];
            Eigen::MatrixXd s(w, N), s1(w, N), s2(w, N);
            for (Eigen::Index k = 0; k < w * N; ++k) {
                const SigmoidDerivatives sd = sigmoid_derivatives(layer.pre[0].data()[k]);
                s.data()[k] = sd.s;
                s1.data()[k] = sd.s1;
                s2.data()[k] = sd.s2;
            }
            std::vector<Eigen::MatrixXd> next(nc);
            next[0] = s;
            for (int i = 0; i < d; ++i) {
                const int ci = pos[slot_first(i)];
                next[ci] = s1.cwiseProduct(layer.pre[ci]);
            }
            for (int i = 0; i < d; ++i) {
                for (int k = i; k < d; ++k) {
                    const int cik = pos[slot_second(i, k)];
                    const int ci = pos[slot_first(i)];
                    const int ck = pos[slot_first(k)];
                    next[cik] = s2.cwiseProduct(layer.pre[ci]).cwiseProduct(layer.pre[ck]) +
                                s1.cwiseProduct(layer.pre[cik]);
                }
            }
            chunk.layers.push_back(std::move(layer));
            H = std::move(next);
        }
        for (std::size_t c = 0; c < nc; ++c) {
            const Eigen::RowVectorXd out = params_.output_weights.transpose() * H[c];
            for (Eigen::Index n = 0; n < N; ++n) {
                DerivativeBundle& bd = bundles_[begin + n];
                const int e = components_[c];
                if (e == 0) {
                    bd.value = out[n];
                } else if (e < 4) {
                    bd.d1[e - 1] = out[n];
                } else {
                    bd.d2[e - 4] = out[n];
                }
            }
        }
        chunk.last = std::move(H);
        chunks_.push_back(std::move(chunk));
    }
}

void BatchEvaluation::backward_deep(std::span<const BundleVector> adjoints,
                                    Eigen::Ref<Eigen::VectorXd> grad) const {
    const int d = params_.input_dim;
    const std::size_t L = params_.layer_widths.size();
    const std::size_t nc = components_.size();
    std::vector<int> pos(kBundleSize, -1);
    for (std::size_t c = 0; c < nc; ++c) pos[components_[c]] = static_cast<int>(c);

    std::vector<Eigen::Index> offset(L + 1, 0);
    for (std::size_t l = 0; l < L; ++l) {
        offset[l + 1] = offset[l] + params_.weights[l].size() + params_.biases[l].size();
    }

    for (const Chunk& chunk : chunks_) {
        const auto N = static_cast<Eigen::Index>(chunk.size);
        std::vector<Eigen::RowVectorXd> out_bar(nc, Eigen::RowVectorXd(N));
        for (std::size_t c = 0; c < nc; ++c) {
            for (Eigen::Index n = 0; n < N; ++n) out_bar[c][n] = adjoints[chunk.begin + n][components_[c]];
        }
        // Output layer.
        std::vector<Eigen::MatrixXd> Hbar(nc);
        {
            auto g = grad.segment(offset[L], params_.output_weights.size());
            for (std::size_t c = 0; c < nc; ++c) {
                g.noalias() += chunk.last[c] * out_bar[c].transpose();
                Hbar[c].noalias() = params_.output_weights * out_bar[c];
            }
        }
        for (std::size_t l = L; l-- > 0;) {
            const Layer& layer = chunk.layers[l];
            const Eigen::Index w = params_.layer_widths[l];
            Eigen::MatrixXd s1(w, N), s2(w, N), s3(w, N);
            for (Eigen::Index k = 0; k < w * N; ++k) {
                const SigmoidDerivatives sd = sigmoid_derivatives(layer.pre[0].data()[k]);
                s1.data()[k] = sd.s1;
                s2.data()[k] = sd.s2;
                s3.data()[k] = sd.s3;
            }
            std::vector<Eigen::MatrixXd> Zbar(nc);
            Zbar[0] = Hbar[0].cwiseProduct(s1);
            for (int i = 0; i < d; ++i) {
                const int ci = pos[slot_first(i)];
                Zbar[ci] = Hbar[ci].cwiseProduct(s1);
                Zbar[0] += Hbar[ci].cwiseProduct(s2).cwiseProduct(layer.pre[ci]);
            }
            for (int i = 0; i < d; ++i) {
                for (int k = i; k < d; ++k) {
                    const int cik = pos[slot_second(i, k)];
                    const int ci = pos[slot_first(i)];
                    const int ck = pos[slot_first(k)];
                    const Eigen::MatrixXd hb2 = Hbar[cik].cwiseProduct(s2);
                    Zbar[cik] = Hbar[cik].cwiseProduct(s1);
                    Zbar[ci] += hb2.cwiseProduct(layer.pre[ck]);
                    Zbar[ck] += hb2.cwiseProduct(layer.pre[ci]);
                    Zbar[0] += Hbar[cik].cwiseProduct(
                        s3.cwiseProduct(layer.pre[ci]).cwiseProduct(layer.pre[ck]) +
                        s2.cwiseProduct(layer.pre[cik]));
                }
            }
            const Eigen::Index wsize = params_.weights[l].size();
            Eigen::MatrixXd gW = Eigen::MatrixXd::Zero(params_.weights[l].rows(), params_.weights[l].cols());
            for (std::size_t c = 0; c < nc; ++c) gW.noalias() += Zbar[c] * layer.input[c].transpose();
            grad.segment(offset[l], wsize) += gW.reshaped();
            grad.segment(offset[l] + wsize, w) += Zbar[0].rowwise().sum();
            if (l > 0) {
                for (std::size_t c = 0; c < nc; ++c) Hbar[c].noalias() = params_.weights[l].transpose() * Zbar[c];
            }
        }
    }
}

}  // namespace slpinn
