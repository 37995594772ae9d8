#include "schedlab/cmpnet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "schedlab/errors.hpp"
#include "schedlab/random.hpp"
#include "schedlab/scenario_io.hpp"

namespace schedlab {

int ceil_log2(int n) {
    int k = 0;
    while ((1 << k) < n) ++k;
    return k;
}

int first_hidden_width(int x_dim) { return 1 << (ceil_log2(x_dim) + 6); }

namespace {

std::vector<int> widths_from(const NetConfig& cfg) {
    if (cfg.x_dim <= 0) throw ConfigError("cmpnet: x_dim must be positive");
    if (cfg.hidden_layers != 3 && cfg.hidden_layers != 4)
        throw ConfigError("cmpnet: hidden_layers must be 3 or 4");
    int h = first_hidden_width(cfg.x_dim);
    if (cfg.h1_cap > 0) h = std::min(h, cfg.h1_cap);
    std::vector<int> w;
    for (int k = 0; k < cfg.hidden_layers; ++k) {
        w.push_back(std::max(1, h));
        h /= 2;
    }
    return w;
}

inline double dot(const double* a, const double* b, int n) {
    double acc = 0.0;
    for (int k = 0; k < n; ++k) acc += a[k] * b[k];
    return acc;
}

inline bool is_tanh_layer(std::size_t idx) { return idx < 2; }

struct Activations {
    // Per hidden layer: pre-activations and activations for both roles.
    std::vector<std::vector<double>> u_pre, v_pre, u_act, v_act;
    double z1 = 0.0, z2 = 0.0, p1 = 0.5, p2 = 0.5;
};

}  // namespace

ComparatorNet::ComparatorNet(const NetConfig& cfg, std::uint64_t seed, double init_scale)
    : ComparatorNet(cfg.x_dim, widths_from(cfg), seed, init_scale) {}

ComparatorNet::ComparatorNet(int x_dim, std::vector<int> widths, std::uint64_t seed,
                             double init_scale)
    : x_dim_(x_dim), widths_(std::move(widths)) {
    if (x_dim_ <= 0 || widths_.empty()) throw ConfigError("cmpnet: empty architecture");
    SplitMix64 rng(seed);
    int in = x_dim_;
    for (int out : widths_) {
        Layer layer;
        layer.in = in;
        layer.out = out;
        const double bound = init_scale / std::sqrt(static_cast<double>(in));
        layer.w1.resize(static_cast<std::size_t>(out) * static_cast<std::size_t>(in));
        layer.w2.resize(layer.w1.size());
        for (double& w : layer.w1) w = rng.uniform(-bound, bound);
        for (double& w : layer.w2) w = rng.uniform(-bound, bound);
        layer.b.assign(static_cast<std::size_t>(out), 0.0);
        hidden_.push_back(std::move(layer));
        in = out;
    }
    const double bound = init_scale / std::sqrt(static_cast<double>(in));
    out_w1_.resize(static_cast<std::size_t>(in));
    out_w2_.resize(static_cast<std::size_t>(in));
    for (double& w : out_w1_) w = rng.uniform(-bound, bound);
    for (double& w : out_w2_) w = rng.uniform(-bound, bound);
    out_b_ = 0.0;
}

std::size_t ComparatorNet::num_params() const {
    std::size_t n = 0;
    for (const Layer& l : hidden_) n += l.w1.size() + l.w2.size() + l.b.size();
    return n + out_w1_.size() + out_w2_.size() + 1;
}

namespace {

void forward_pass(const ComparatorNet::Layer* layers, std::size_t n_layers,
                  const std::vector<double>& ow1, const std::vector<double>& ow2, double ob,
                  std::span<const double> x, std::span<const double> y, Activations& act) {
    act.u_pre.resize(n_layers);
    act.v_pre.resize(n_layers);
    act.u_act.resize(n_layers);
    act.v_act.resize(n_layers);
    const double* u_in = x.data();
    const double* v_in = y.data();
    for (std::size_t k = 0; k < n_layers; ++k) {
        const auto& l = layers[k];
        auto& up = act.u_pre[k];
        auto& vp = act.v_pre[k];
        auto& ua = act.u_act[k];
        auto& va = act.v_act[k];
        up.resize(static_cast<std::size_t>(l.out));
        vp.resize(static_cast<std::size_t>(l.out));
        ua.resize(static_cast<std::size_t>(l.out));
        va.resize(static_cast<std::size_t>(l.out));
        for (int o = 0; o < l.out; ++o) {
            const double* r1 = l.w1.data() + static_cast<std::size_t>(o) * l.in;
            const double* r2 = l.w2.data() + static_cast<std::size_t>(o) * l.in;
            // w1 takes the unit's own role, w2 the opposite role; identical
            // expressions under swapped inputs make the swap exact.
            up[static_cast<std::size_t>(o)] =
                dot(r1, u_in, l.in) + dot(r2, v_in, l.in) + l.b[static_cast<std::size_t>(o)];
            vp[static_cast<std::size_t>(o)] =
                dot(r1, v_in, l.in) + dot(r2, u_in, l.in) + l.b[static_cast<std::size_t>(o)];
        }
        if (is_tanh_layer(k)) {
            for (int o = 0; o < l.out; ++o) {
                ua[static_cast<std::size_t>(o)] = std::tanh(up[static_cast<std::size_t>(o)]);
                va[static_cast<std::size_t>(o)] = std::tanh(vp[static_cast<std::size_t>(o)]);
            }
        } else {
            for (int o = 0; o < l.out; ++o) {
                ua[static_cast<std::size_t>(o)] = std::max(0.0, up[static_cast<std::size_t>(o)]);
                va[static_cast<std::size_t>(o)] = std::max(0.0, vp[static_cast<std::size_t>(o)]);
            }
        }
        u_in = ua.data();
        v_in = va.data();
    }
    const int last = layers[n_layers - 1].out;
    act.z1 = dot(ow1.data(), u_in, last) + dot(ow2.data(), v_in, last) + ob;
    act.z2 = dot(ow1.data(), v_in, last) + dot(ow2.data(), u_in, last) + ob;
    const double m = std::max(act.z1, act.z2);
    const double e1 = std::exp(act.z1 - m);
    const double e2 = std::exp(act.z2 - m);
    act.p1 = e1 / (e1 + e2);
    act.p2 = e2 / (e1 + e2);
}

}  // namespace

std::pair<double, double> ComparatorNet::forward(std::span<const double> x,
                                                 std::span<const double> y) const {
    if (static_cast<int>(x.size()) != x_dim_ || static_cast<int>(y.size()) != x_dim_)
        throw ConfigError("cmpnet: input dimension mismatch");
    Activations act;
    forward_pass(hidden_.data(), hidden_.size(), out_w1_, out_w2_, out_b_, x, y, act);
    return {act.p1, act.p2};
}

double ComparatorNet::min_relu_margin(std::span<const double> x, std::span<const double> y) const {
    Activations act;
    forward_pass(hidden_.data(), hidden_.size(), out_w1_, out_w2_, out_b_, x, y, act);
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 2; k < hidden_.size(); ++k) {
        for (double p : act.u_pre[k]) margin = std::min(margin, std::abs(p));
        for (double p : act.v_pre[k]) margin = std::min(margin, std::abs(p));
    }
    return margin;
}

std::vector<double> ComparatorNet::params_flat() const {
    std::vector<double> flat;
    flat.reserve(num_params());
    for (const Layer& l : hidden_) {
        flat.insert(flat.end(), l.w1.begin(), l.w1.end());
        flat.insert(flat.end(), l.w2.begin(), l.w2.end());
        flat.insert(flat.end(), l.b.begin(), l.b.end());
    }
    flat.insert(flat.end(), out_w1_.begin(), out_w1_.end());
    flat.insert(flat.end(), out_w2_.begin(), out_w2_.end());
    flat.push_back(out_b_);
    return flat;
}

void ComparatorNet::set_params_flat(const std::vector<double>& flat) {
    if (flat.size() != num_params()) throw ConfigError("cmpnet: parameter count mismatch");
    std::size_t k = 0;
    auto take = [&](std::vector<double>& dst) {
        std::copy(flat.begin() + static_cast<std::ptrdiff_t>(k),
                  flat.begin() + static_cast<std::ptrdiff_t>(k + dst.size()), dst.begin());
        k += dst.size();
    };
    for (Layer& l : hidden_) {
        take(l.w1);
        take(l.w2);
        take(l.b);
    }
    take(out_w1_);
    take(out_w2_);
    out_b_ = flat[k];
}

// ----------------------------------------------------------------------------
// Training

struct NetGradients {
    std::vector<ComparatorNet::Layer> hidden;  // same shapes, gradient values
    std::vector<double> out_w1, out_w2;
    double out_b = 0.0;

    explicit NetGradients(const ComparatorNet& net) { reset(net); }

    void reset(const ComparatorNet& net) {
        hidden.clear();
        for (const auto& l : net.hidden_) {
            ComparatorNet::Layer g;
            g.in = l.in;
            g.out = l.out;
            g.w1.assign(l.w1.size(), 0.0);
            g.w2.assign(l.w2.size(), 0.0);
            g.b.assign(l.b.size(), 0.0);
            hidden.push_back(std::move(g));
        }
        out_w1.assign(net.out_w1_.size(), 0.0);
        out_w2.assign(net.out_w2_.size(), 0.0);
        out_b = 0.0;
    }

    // Accumulates d(loss)/d(params) for one sample; returns its loss.
    double accumulate(const ComparatorNet& net, const Sample& s) {
        Activations act;
        forward_pass(net.hidden_.data(), net.hidden_.size(), net.out_w1_, net.out_w2_,
                     net.out_b_, s.x, s.y, act);
        const double p_label = s.label == 0 ? act.p1 : act.p2;
        const double loss = -std::log(std::max(p_label, 1e-300));

        const double dz1 = act.p1 - (s.label == 0 ? 1.0 : 0.0);
        const double dz2 = act.p2 - (s.label == 1 ? 1.0 : 0.0);

        const std::size_t L = net.hidden_.size();
        const auto& u_last = act.u_act[L - 1];
        const auto& v_last = act.v_act[L - 1];
        const int last = net.hidden_[L - 1].out;
        std::vector<double> du(static_cast<std::size_t>(last)), dv(static_cast<std::size_t>(last));
        for (int o = 0; o < last; ++o) {
            const std::size_t oz = static_cast<std::size_t>(o);
            out_w1[oz] += dz1 * u_last[oz] + dz2 * v_last[oz];
            out_w2[oz] += dz1 * v_last[oz] + dz2 * u_last[oz];
            du[oz] = dz1 * net.out_w1_[oz] + dz2 * net.out_w2_[oz];
            dv[oz] = dz1 * net.out_w2_[oz] + dz2 * net.out_w1_[oz];
        }
        out_b += dz1 + dz2;

        for (std::size_t k = L; k-- > 0;) {
            const auto& l = net.hidden_[k];
            auto& g = hidden[k];
            std::vector<double> ds(static_cast<std::size_t>(l.out)),
                dr(static_cast<std::size_t>(l.out));
            for (int o = 0; o < l.out; ++o) {
                const std::size_t oz = static_cast<std::size_t>(o);
                double fu, fv;
                if (is_tanh_layer(k)) {
                    fu = 1.0 - act.u_act[k][oz] * act.u_act[k][oz];
                    fv = 1.0 - act.v_act[k][oz] * act.v_act[k][oz];
                } else {
                    fu = act.u_pre[k][oz] > 0.0 ? 1.0 : 0.0;
                    fv = act.v_pre[k][oz] > 0.0 ? 1.0 : 0.0;
                }
                ds[oz] = du[oz] * fu;
                dr[oz] = dv[oz] * fv;
            }
            const double* u_in = k == 0 ? s.x.data() : act.u_act[k - 1].data();
            const double* v_in = k == 0 ? s.y.data() : act.v_act[k - 1].data();
            for (int o = 0; o < l.out; ++o) {
                const std::size_t oz = static_cast<std::size_t>(o);
                double* g1 = g.w1.data() + oz * static_cast<std::size_t>(l.in);
                double* g2 = g.w2.data() + oz * static_cast<std::size_t>(l.in);
                for (int c = 0; c < l.in; ++c) {
                    g1[c] += ds[oz] * u_in[c] + dr[oz] * v_in[c];
                    g2[c] += ds[oz] * v_in[c] + dr[oz] * u_in[c];
                }
                g.b[oz] += ds[oz] + dr[oz];
            }
            if (k > 0) {
                std::vector<double> ndu(static_cast<std::size_t>(l.in), 0.0),
                    ndv(static_cast<std::size_t>(l.in), 0.0);
                for (int o = 0; o < l.out; ++o) {
                    const std::size_t oz = static_cast<std::size_t>(o);
                    const double* r1 = l.w1.data() + oz * static_cast<std::size_t>(l.in);
                    const double* r2 = l.w2.data() + oz * static_cast<std::size_t>(l.in);
                    for (int c = 0; c < l.in; ++c) {
                        ndu[static_cast<std::size_t>(c)] += r1[c] * ds[oz] + r2[c] * dr[oz];
                        ndv[static_cast<std::size_t>(c)] += r2[c] * ds[oz] + r1[c] * dr[oz];
                    }
                }
                du = std::move(ndu);
                dv = std::move(ndv);
            }
        }
        return loss;
    }

    std::vector<double> flat() const {
        std::vector<double> out;
        for (const auto& g : hidden) {
            out.insert(out.end(), g.w1.begin(), g.w1.end());
            out.insert(out.end(), g.w2.begin(), g.w2.end());
            out.insert(out.end(), g.b.begin(), g.b.end());
        }
        out.insert(out.end(), out_w1.begin(), out_w1.end());
        out.insert(out.end(), out_w2.begin(), out_w2.end());
        out.push_back(out_b);
        return out;
    }
};

double sample_loss(const ComparatorNet& net, const Sample& s) {
    const auto [p1, p2] = net.forward(s.x, s.y);
    return -std::log(std::max(s.label == 0 ? p1 : p2, 1e-300));
}

double mean_loss(const ComparatorNet& net, const std::vector<Sample>& samples) {
    double acc = 0.0;
    for (const Sample& s : samples) acc += sample_loss(net, s);
    return samples.empty() ? 0.0 : acc / static_cast<double>(samples.size());
}

double accuracy(const ComparatorNet& net, const std::vector<Sample>& samples) {
    if (samples.empty()) return 0.0;
    int hits = 0;
    for (const Sample& s : samples) {
        const auto [p1, p2] = net.forward(s.x, s.y);
        if ((s.label == 0 ? p1 : p2) > 0.5) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(samples.size());
}

namespace {

std::string layer_norms(const ComparatorNet& net) {
    std::ostringstream out;
    for (std::size_t k = 0; k < net.hidden().size(); ++k) {
        const auto& l = net.hidden()[k];
        double n1 = 0.0, n2 = 0.0;
        for (double w : l.w1) n1 += w * w;
        for (double w : l.w2) n2 += w * w;
        out << " layer" << k << "(|w1|=" << format_real(std::sqrt(n1))
            << ",|w2|=" << format_real(std::sqrt(n2)) << ")";
    }
    return out.str();
}

}  // namespace

TrainReport train(ComparatorNet& net, const std::vector<Sample>& samples,
                  const TrainConfig& cfg) {
    if (samples.empty()) throw TrainError("train: no samples");
    for (const Sample& s : samples)
        if (static_cast<int>(s.x.size()) != net.x_dim() ||
            static_cast<int>(s.y.size()) != net.x_dim())
            throw TrainError("train: sample dimension mismatch");
    if (cfg.batch_size <= 0 || cfg.learning_rate <= 0.0)
        throw TrainError("train: batch size and learning rate must be positive");

    TrainReport report;
    if (cfg.epochs == 0) return report;

    SplitMix64 rng(cfg.seed);
    std::vector<std::size_t> idx(samples.size());
    std::iota(idx.begin(), idx.end(), 0u);
    for (std::size_t k = idx.size(); k > 1; --k)
        std::swap(idx[k - 1], idx[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(k) - 1))]);

    std::size_t n_val = static_cast<std::size_t>(
        std::llround(cfg.val_split * static_cast<double>(samples.size())));
    n_val = std::min(n_val, samples.size() - 1);
    std::vector<Sample> train_set, val_set;
    for (std::size_t k = 0; k < idx.size(); ++k)
        (k < idx.size() - n_val ? train_set : val_set).push_back(samples[idx[k]]);
    if (val_set.empty()) val_set = train_set;

    NetGradients grads(net);
    std::vector<double> velocity(net.num_params(), 0.0);
    std::vector<double> best_params = net.params_flat();
    double best_val = mean_loss(net, val_set);
    report.val_loss.push_back(best_val);
    int stale = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fresh shuffle of the training set each epoch.
        for (std::size_t k = train_set.size(); k > 1; --k)
            std::swap(train_set[k - 1],
                      train_set[static_cast<std::size_t>(
                          rng.uniform_int(0, static_cast<std::int64_t>(k) - 1))]);

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < train_set.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop =
                std::min(train_set.size(), start + static_cast<std::size_t>(cfg.batch_size));
            grads.reset(net);
            double batch_loss = 0.0;
            for (std::size_t k = start; k < stop; ++k)
                batch_loss += grads.accumulate(net, train_set[k]);
            const double inv = 1.0 / static_cast<double>(stop - start);
            epoch_loss += batch_loss;
            if (!std::isfinite(batch_loss))
                throw TrainError("train: non-finite loss; lr=" +
                                 format_real(cfg.learning_rate) + layer_norms(net));

            std::vector<double> g = grads.flat();
            std::vector<double> params = net.params_flat();
            for (std::size_t k = 0; k < params.size(); ++k) {
                velocity[k] = cfg.momentum * velocity[k] - cfg.learning_rate * g[k] * inv;
                params[k] += velocity[k];
            }
            net.set_params_flat(params);
        }
        report.train_loss.push_back(epoch_loss / static_cast<double>(train_set.size()));
        const double val = mean_loss(net, val_set);
        report.val_loss.push_back(val);
        if (!std::isfinite(val))
            throw TrainError("train: non-finite validation loss; lr=" +
                             format_real(cfg.learning_rate) + layer_norms(net));
        ++report.epochs_run;
        if (val < best_val) {
            best_val = val;
            best_params = net.params_flat();
            stale = 0;
        } else if (++stale > cfg.patience) {
            report.early_stopped = true;
            break;
        }
    }

    net.set_params_flat(best_params);
    report.val_accuracy = accuracy(net, val_set);
    return report;
}

std::vector<double> analytic_gradient(const ComparatorNet& net, const Sample& s) {
    NetGradients grads(net);
    grads.accumulate(net, s);
    return grads.flat();
}

double grad_check(const ComparatorNet& net, const Sample& s, double epsilon) {
    const std::vector<double> analytic = analytic_gradient(net, s);
    std::vector<double> params = net.params_flat();
    ComparatorNet probe = net;
    double worst = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
        const double saved = params[k];
        params[k] = saved + epsilon;
        probe.set_params_flat(params);
        const double up = sample_loss(probe, s);
        params[k] = saved - epsilon;
        probe.set_params_flat(params);
        const double down = sample_loss(probe, s);
        params[k] = saved;
        const double numeric = (up - down) / (2.0 * epsilon);
        const double denom = std::max({std::abs(analytic[k]), std::abs(numeric), 1e-6});
        worst = std::max(worst, std::abs(analytic[k] - numeric) / denom);
    }
    probe.set_params_flat(params);
    return worst;
}

std::size_t rank_top(const ComparatorNet& net,
                     const std::vector<std::vector<double>>& candidates) {
    return rank_top_index(candidates.size(), [&](std::size_t a, std::size_t b) {
        return net.forward(candidates[a], candidates[b]).first;
    });
}

// ----------------------------------------------------------------------------
// Serialization

namespace {

void write_raw64le(std::ostream& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    char buf[8];
    for (int k = 0; k < 8; ++k) buf[k] = static_cast<char>((bits >> (8 * k)) & 0xff);
    out.write(buf, 8);
}

double read_raw64le(std::istream& in) {
    char buf[8];
    in.read(buf, 8);
    if (!in) throw IoError("cmpnet: truncated raw parameter block");
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k)
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[k])) << (8 * k);
    return std::bit_cast<double>(bits);
}

}  // namespace

void save_net(const ComparatorNet& net, const std::string& path, std::uint64_t registry,
              bool raw64le, const std::map<std::string, std::string>& provenance) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cmpnet: cannot open for write: " + path);
    out << "schedlab-cmpnet v1\n";
    out << "encoding " << (raw64le ? "raw64le" : "decimal") << "\n";
    out << "xdim " << net.x_dim() << "\n";
    out << "hidden " << net.widths().size() << "\n";
    out << "widths";
    for (int w : net.widths()) out << " " << w;
    out << "\n";
    char hex[24];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(registry));
    out << "registry " << hex << "\n";
    for (const auto& [key, value] : provenance) out << "prov " << key << " " << value << "\n";
    const std::vector<double> params = net.params_flat();
    out << "params " << params.size() << "\n";
    if (raw64le) {
        for (double v : params) write_raw64le(out, v);
    } else {
        for (double v : params) out << format_real(v) << "\n";
    }
    if (!out) throw IoError("cmpnet: write failed: " + path);
}

ComparatorNet load_net(const std::string& path, std::uint64_t expected_registry,
                       std::map<std::string, std::string>* provenance) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cmpnet: cannot open: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "schedlab-cmpnet v1")
        throw IoError("cmpnet: missing or unsupported header: '" + line + "'");

    bool raw = false;
    int x_dim = 0;
    std::size_t n_hidden = 0, n_params = 0;
    std::vector<int> widths;
    std::uint64_t registry = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "encoding") {
            std::string enc;
            ls >> enc;
            if (enc == "raw64le")
                raw = true;
            else if (enc != "decimal")
                throw IoError("cmpnet: unknown encoding '" + enc + "'");
        } else if (tag == "xdim") {
            ls >> x_dim;
        } else if (tag == "hidden") {
            ls >> n_hidden;
        } else if (tag == "widths") {
            int w;
            while (ls >> w) widths.push_back(w);
        } else if (tag == "registry") {
            std::string hex;
            ls >> hex;
            registry = std::stoull(hex, nullptr, 16);
        } else if (tag == "prov") {
            std::string key, value;
            ls >> key >> value;
            if (provenance) (*provenance)[key] = value;
        } else if (tag == "params") {
            ls >> n_params;
            break;
        } else {
            throw IoError("cmpnet: unknown header line '" + line + "'");
        }
    }
    if (x_dim <= 0 || widths.size() != n_hidden || widths.empty())
        throw IoError("cmpnet: incomplete header");
    if (expected_registry != 0 && registry != expected_registry)
        throw IoError("cmpnet: feature registry mismatch (model was trained on a different "
                      "feature layout)");

    ComparatorNet net(x_dim, widths, /*seed=*/0);
    if (net.num_params() != n_params) throw IoError("cmpnet: parameter count mismatch");
    std::vector<double> params(n_params);
    if (raw) {
        for (double& v : params) v = read_raw64le(in);
    } else {
        for (double& v : params) {
            if (!std::getline(in, line)) throw IoError("cmpnet: truncated parameter list");
            char* end = nullptr;
            v = std::strtod(line.c_str(), &end);
            if (end == line.c_str()) throw IoError("cmpnet: bad parameter value '" + line + "'");
        }
    }
    net.set_params_flat(params);
    return net;
}

}  // namespace schedlab
