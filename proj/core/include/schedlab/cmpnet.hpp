#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace schedlab {

// Smallest k with 2^k >= n.
int ceil_log2(int n);

// First hidden width from the input dimension: 2^(ceil(lg x_dim) + 6).
// Successive hidden layers shrink by a factor of two.
int first_hidden_width(int x_dim);

struct NetConfig {
    int x_dim = 0;
    int hidden_layers = 4;  // 3 supported for the narrower variant
    int h1_cap = 512;       // 0 = uncapped width formula
};

// Pairwise comparator: two equal-length input vectors, two softmax outputs
// [p(x beats y), p(y beats x)]. Each layer holds a direct block w1, a cross
// block w2 and one shared bias, so both input roles pass through identical
// parameters. That tying forces reflexivity (identical inputs give 0.5/0.5)
// and swap equivalence (swapping inputs swaps the outputs exactly);
// transitivity is not guaranteed. Hidden activations: tanh on the first two
// layers, ReLU on the rest.
class ComparatorNet {
  public:
    ComparatorNet(const NetConfig& cfg, std::uint64_t seed, double init_scale = 1.0);
    ComparatorNet(int x_dim, std::vector<int> widths, std::uint64_t seed,
                  double init_scale = 1.0);

    int x_dim() const { return x_dim_; }
    const std::vector<int>& widths() const { return widths_; }
    std::size_t num_params() const;

    // (p_xy, p_yx); the two probabilities sum to 1 up to one rounding.
    std::pair<double, double> forward(std::span<const double> x,
                                      std::span<const double> y) const;

    std::vector<double> params_flat() const;
    void set_params_flat(const std::vector<double>& flat);

    struct Layer {
        int in = 0, out = 0;
        std::vector<double> w1, w2;  // row-major out x in
        std::vector<double> b;
    };
    const std::vector<Layer>& hidden() const { return hidden_; }

    // Smallest |pre-activation| over all ReLU units for this input pair;
    // finite-difference checks need it clear of the kink.
    double min_relu_margin(std::span<const double> x, std::span<const double> y) const;

  private:
    friend struct NetGradients;
    friend class NetTrainer;

    int x_dim_ = 0;
    std::vector<int> widths_;
    std::vector<Layer> hidden_;
    std::vector<double> out_w1_, out_w2_;
    double out_b_ = 0.0;
};

struct Sample {
    std::vector<double> x, y;
    int label = 0;  // 0: x beats y, 1: y beats x
};

struct TrainConfig {
    double learning_rate = 1e-3;
    double momentum = 0.9;
    int batch_size = 64;
    int epochs = 30;
    double init_scale = 1.0;   // applied at net construction
    double val_split = 0.2;
    int patience = 5;          // epochs without val improvement before stopping
    std::uint64_t seed = 1;
};

struct TrainReport {
    std::vector<double> train_loss;  // per epoch
    std::vector<double> val_loss;    // per epoch, starting with the pre-training value
    int epochs_run = 0;
    double val_accuracy = 0.0;
    bool early_stopped = false;
};

// Mini-batch gradient descent with momentum on categorical cross-entropy.
// Gradients of tied parameters are summed over both roles, so the sharing
// invariants survive every update. The best-validation parameter snapshot is
// restored at the end; zero epochs leave the net bit-for-bit unchanged.
// Throws TrainError (with layer norms and the learning rate) if the loss
// goes non-finite.
TrainReport train(ComparatorNet& net, const std::vector<Sample>& samples,
                  const TrainConfig& cfg);

// Cross-entropy of one sample.
double sample_loss(const ComparatorNet& net, const Sample& s);
double mean_loss(const ComparatorNet& net, const std::vector<Sample>& samples);
double accuracy(const ComparatorNet& net, const std::vector<Sample>& samples);

// Max relative error between analytic gradients and central finite
// differences over every parameter.
double grad_check(const ComparatorNet& net, const Sample& s, double epsilon);

// Analytic gradient as a flat vector (same order as params_flat).
std::vector<double> analytic_gradient(const ComparatorNet& net, const Sample& s);

// Single bubble pass over candidates: the incumbent is replaced whenever the
// challenger's win probability strictly exceeds 0.5 (ties keep the
// incumbent). Returns the surviving index.
template <typename Prob>
std::size_t rank_top_index(std::size_t n, Prob&& p_first_beats_second) {
    std::size_t champ = 0;
    for (std::size_t k = 1; k < n; ++k)
        if (p_first_beats_second(k, champ) > 0.5) champ = k;
    return champ;
}

std::size_t rank_top(const ComparatorNet& net, const std::vector<std::vector<double>>& candidates);

// Versioned model file, header "schedlab-cmpnet v1". Parameters are stored
// either as 17-significant-digit decimals or as raw little-endian 64-bit
// floats; both round-trip bitwise. `registry` guards against feature/model
// layout mismatches; provenance lines are free-form key/value pairs.
void save_net(const ComparatorNet& net, const std::string& path, std::uint64_t registry,
              bool raw64le = false, const std::map<std::string, std::string>& provenance = {});
ComparatorNet load_net(const std::string& path, std::uint64_t expected_registry,
                       std::map<std::string, std::string>* provenance = nullptr);

}  // namespace schedlab
