#pragma once

// Two-layer SL-PINN network and the deep baseline network.
//
// Both map Cartesian inputs (x, y) or (x, y, t) to a scalar through logistic
// sigmoid hidden layers and a bias-free linear output layer. Evaluation
// returns the value together with exact first and second input derivatives;
// parameter gradients of every one of those quantities are available through
// BatchEvaluation::backward.

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace slpinn {

/// Number of inputs handled at most (x, y, t).
inline constexpr int kMaxInputs = 3;

/// Flat layout of a DerivativeBundle: value, 3 first partials, 6 packed
/// second partials. Unused slots stay zero for two-input networks.
inline constexpr int kBundleSize = 10;

using Point = std::array<double, kMaxInputs>;
using BundleVector = std::array<double, kBundleSize>;

enum class Architecture { TwoLayer, Deep };

struct NetworkParams {
    Architecture architecture = Architecture::TwoLayer;
    int input_dim = 2;
    std::vector<int> layer_widths;
    std::vector<Eigen::MatrixXd> weights;  // weights[l] is widths[l] x fan_in
    std::vector<Eigen::VectorXd> biases;
    Eigen::VectorXd output_weights;

    static NetworkParams zeros(Architecture arch, int input_dim, std::vector<int> widths);

    std::size_t parameter_count() const;

    /// Flat order: per layer the weight matrix column by column, then its
    /// biases; output weights last. For the two-layer net this is
    /// (w11..w1n, w21..w2n, b1..bn, c1..cn).
    Eigen::VectorXd flatten() const;
    void assign(const Eigen::VectorXd& flat);

    /// Throws DimensionError/DomainError on inconsistent shapes or non-finite entries.
    void validate() const;
};

/// Value plus first and second partials of a scalar field at one point.
struct DerivativeBundle {
    int dim = 2;
    double value = 0.0;
    std::array<double, 3> d1{};
    std::array<double, 6> d2{};  // packed, see packed_index()

    double second(int i, int k) const;
    BundleVector flat() const;
    static DerivativeBundle from_flat(int dim, const BundleVector& v);
};

/// Logistic sigmoid and its first three derivatives, overflow safe.
struct SigmoidDerivatives {
    double s, s1, s2, s3;
};
SigmoidDerivatives sigmoid_derivatives(double z);
double sigmoid(double z);

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) per layer, deterministic in seed.
NetworkParams init_params(std::uint64_t seed, Architecture arch, int input_dim,
                          std::vector<int> widths);

DerivativeBundle eval_network(const NetworkParams& params, std::span<const double> point);

/// Row p, column e holds d(entry e of the bundle)/d(parameter p).
Eigen::MatrixXd param_gradient_of_bundle(const NetworkParams& params,
                                         std::span<const double> point);

/// Forward pass over a set of points, keeping what the reverse pass needs.
class BatchEvaluation {
public:
    BatchEvaluation(const NetworkParams& params, std::span<const Point> points);

    const std::vector<DerivativeBundle>& bundles() const { return bundles_; }

    /// grad += sum_n sum_e adjoints[n][e] * d bundle_n[e] / d theta.
    void backward(std::span<const BundleVector> adjoints, Eigen::Ref<Eigen::VectorXd> grad) const;

private:
    struct Layer {
        // One matrix per active bundle component, width x chunk.
        std::vector<Eigen::MatrixXd> input;
        std::vector<Eigen::MatrixXd> pre;
    };
    struct Chunk {
        std::size_t begin = 0;
        std::size_t size = 0;
        std::vector<Layer> layers;
        std::vector<Eigen::MatrixXd> last;  // last hidden activation jets
    };

    void forward_two_layer();
    void forward_deep();
    void backward_two_layer(std::span<const BundleVector> adjoints,
                            Eigen::Ref<Eigen::VectorXd> grad) const;
    void backward_deep(std::span<const BundleVector> adjoints,
                       Eigen::Ref<Eigen::VectorXd> grad) const;

    const NetworkParams& params_;
    std::vector<Point> points_;
    std::vector<DerivativeBundle> bundles_;
    std::vector<int> components_;  // active flat bundle indices
    std::vector<Chunk> chunks_;
};

}  // namespace slpinn
