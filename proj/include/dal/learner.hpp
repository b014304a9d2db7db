#pragma once

// The active learner: a linear-softmax or one-hidden-layer (tanh) classifier
// trained from scratch with mini-batch SGD on mean cross-entropy, with early
// stopping on a validation split. Also provides the analytic gradient of
// sum_q p_q log p_q with respect to the input, used by acquisition.

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "dal/dataset.hpp"
#include "dal/error.hpp"
#include "dal/numerics.hpp"

namespace dal {

enum class Architecture { LinearSoftmax, OneHidden };

constexpr std::string_view to_string(Architecture a) {
    return a == Architecture::LinearSoftmax ? "linear" : "mlp";
}

struct LearnerModel {
    Architecture arch = Architecture::OneHidden;
    std::size_t classes = 0;
    std::size_t input_dim = 0;
    std::size_t hidden = 0;  // 0 for LinearSoftmax
    // OneHidden: logits = out_w * tanh(in_w x + in_b) + out_b.
    // LinearSoftmax: logits = out_w x + out_b, in_w/in_b empty.
    Matrix in_w;
    Vector in_b;
    Matrix out_w;
    Vector out_b;

    /// Model with all parameters zero; predicts the uniform distribution.
    static LearnerModel zeros(Architecture arch, std::size_t classes, std::size_t input_dim, std::size_t hidden = 32) {
        LearnerModel m;
        m.arch = arch;
        m.classes = classes;
        m.input_dim = input_dim;
        const auto c = static_cast<Eigen::Index>(classes);
        const auto d = static_cast<Eigen::Index>(input_dim);
        if (arch == Architecture::OneHidden) {
            m.hidden = hidden;
            const auto h = static_cast<Eigen::Index>(hidden);
            m.in_w = Matrix::Zero(h, d);
            m.in_b = Vector::Zero(h);
            m.out_w = Matrix::Zero(c, h);
        } else {
            m.out_w = Matrix::Zero(c, d);
        }
        m.out_b = Vector::Zero(c);
        return m;
    }

    bool parameters_finite() const {
        return in_w.allFinite() && in_b.allFinite() && out_w.allFinite() && out_b.allFinite();
    }

    Vector logits(const Vector& x) const {
        if (x.size() != static_cast<Eigen::Index>(input_dim))
            throw InvalidInput("learner: input has " + std::to_string(x.size()) + " features, expected " +
                               std::to_string(input_dim));
        if (arch == Architecture::LinearSoftmax) return out_w * x + out_b;
        const Vector h = (in_w * x + in_b).array().tanh().matrix();
        return out_w * h + out_b;
    }

    bool operator==(const LearnerModel&) const = default;
};

struct TrainConfig {
    Architecture arch = Architecture::OneHidden;
    std::size_t hidden = 32;
    double learning_rate = 0.05;
    double momentum = 0.9;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 100;
    std::size_t patience = 10;
    double validation_fraction = 0.1;
    double weight_decay = 1e-4;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be > 0");
        if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train.momentum must be in [0, 1)");
        if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
        if (max_epochs < 1) throw ConfigError("train.max_epochs must be >= 1");
        if (!(validation_fraction > 0.0 && validation_fraction <= 0.5))
            throw ConfigError("train.validation_fraction must be in (0, 0.5]");
        if (!(weight_decay >= 0.0)) throw ConfigError("train.weight_decay must be >= 0");
        if (arch == Architecture::OneHidden && hidden < 1) throw ConfigError("train.hidden must be >= 1");
    }

    bool operator==(const TrainConfig&) const = default;
};

/// Per-epoch record of a training run.
struct TrainTrace {
    std::vector<double> train_loss;  // full training-split objective after each epoch
    std::vector<double> val_loss;    // empty when no validation split was possible
    std::size_t best_epoch = 0;
};

inline ProbVector predict_proba(const LearnerModel& model, const Vector& x) {
    if (!all_finite(x)) throw InvalidInput("predict_proba: non-finite input");
    return softmax(model.logits(x));
}

inline std::size_t predict(const LearnerModel& model, const Vector& x) {
    return argmax_tiebreak(predict_proba(model, x));
}

/// d/dx of sum_q p_q log p_q at x, where p = predict_proba(model, x).
inline Vector input_gradient(const LearnerModel& model, const Vector& x) {
    const ProbVector p = predict_proba(model, x);
    const Vector& pv = p.values();
    const Vector logp = pv.array().max(kLogFloor).log().matrix();
    const double plogp = pv.dot(logp);
    // d(sum p log p)/d logit_j = p_j (log p_j - sum_q p_q log p_q)
    const Vector d_logits = (pv.array() * (logp.array() - plogp)).matrix();
    if (model.arch == Architecture::LinearSoftmax) return model.out_w.transpose() * d_logits;
    const Vector h = (model.in_w * x + model.in_b).array().tanh().matrix();
    const Vector d_pre = ((model.out_w.transpose() * d_logits).array() * (1.0 - h.array().square())).matrix();
    return model.in_w.transpose() * d_pre;
}

/// Fraction of examples whose argmax prediction equals the stored label.
inline double evaluate(const LearnerModel& model, std::span<const LabeledExample> test) {
    if (test.empty()) throw InvalidInput("evaluate: empty test set");
    std::size_t hits = 0;
    for (const auto& e : test)
        if (predict(model, e.x) == e.label) ++hits;
    return static_cast<double>(hits) / static_cast<double>(test.size());
}

namespace detail {

struct Gradients {
    Matrix in_w;
    Vector in_b;
    Matrix out_w;
    Vector out_b;
};

/// Column-wise softmax of a (classes x batch) logit block.
inline Matrix softmax_columns(const Matrix& logits) {
    Matrix p = logits;
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
        const double top = p.col(j).maxCoeff();
        p.col(j) = (p.col(j).array() - top).exp().matrix();
        p.col(j) /= p.col(j).sum();
    }
    return p;
}

/// Mean cross-entropy over the columns of `x` plus the L2 penalty on weights.
/// When `grads` is non-null, also fills the gradient of that objective.
inline double batch_objective(const LearnerModel& m, const Matrix& x, std::span<const std::size_t> labels,
                              double weight_decay, Gradients* grads) {
    const auto n = x.cols();
    const double inv_n = 1.0 / static_cast<double>(n);
    Matrix hidden;
    Matrix logits;
    if (m.arch == Architecture::OneHidden) {
        hidden = ((m.in_w * x).colwise() + m.in_b).array().tanh().matrix();
        logits = (m.out_w * hidden).colwise() + m.out_b;
    } else {
        logits = (m.out_w * x).colwise() + m.out_b;
    }
    Matrix p = softmax_columns(logits);
    double loss = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
        loss -= std::log(std::max(p(static_cast<Eigen::Index>(labels[static_cast<std::size_t>(j)]), j), kLogFloor));
    loss *= inv_n;
    loss += 0.5 * weight_decay * (m.out_w.squaredNorm() + (m.in_w.size() ? m.in_w.squaredNorm() : 0.0));

    if (grads != nullptr) {
        Matrix d_logits = p;
        for (Eigen::Index j = 0; j < n; ++j) d_logits(static_cast<Eigen::Index>(labels[static_cast<std::size_t>(j)]), j) -= 1.0;
        d_logits *= inv_n;
        grads->out_b = d_logits.rowwise().sum();
        if (m.arch == Architecture::OneHidden) {
            grads->out_w = d_logits * hidden.transpose() + weight_decay * m.out_w;
            const Matrix d_pre = ((m.out_w.transpose() * d_logits).array() * (1.0 - hidden.array().square())).matrix();
            grads->in_w = d_pre * x.transpose() + weight_decay * m.in_w;
            grads->in_b = d_pre.rowwise().sum();
        } else {
            grads->out_w = d_logits * x.transpose() + weight_decay * m.out_w;
        }
    }
    return loss;
}

inline Matrix gather_columns(const Matrix& x, std::span<const std::size_t> idx) {
    Matrix out(x.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = x.col(static_cast<Eigen::Index>(idx[j]));
    return out;
}

}  // namespace detail

/// Trains a fresh model. The result depends only on (data, classes, cfg, rng
/// state); nothing carries over between calls. Returns the parameters with the
/// lowest validation loss (or training loss when the data is too small to hold
/// out a validation split).
inline LearnerModel train(std::span<const LabeledExample> data, std::size_t classes, const TrainConfig& cfg, Rng& rng,
                          TrainTrace* trace = nullptr) {
    if (data.empty()) throw InvalidInput("train: empty training data");
    if (classes < 2) throw InvalidInput("train: need at least 2 classes");
    cfg.validate();
    const auto d = data.front().x.size();
    for (const auto& e : data) {
        if (e.x.size() != d || !all_finite(e.x)) throw InvalidInput("train: inconsistent or non-finite features");
        if (e.label >= classes) throw InvalidInput("train: label " + std::to_string(e.label) + " out of range");
    }

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    auto n_val = static_cast<std::size_t>(std::floor(cfg.validation_fraction * static_cast<double>(data.size())));
    if (n_val >= data.size()) n_val = 0;
    const std::vector<std::size_t> val_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

    auto pack = [&](std::span<const std::size_t> idx, Matrix& x, std::vector<std::size_t>& y) {
        x.resize(d, static_cast<Eigen::Index>(idx.size()));
        y.resize(idx.size());
        for (std::size_t j = 0; j < idx.size(); ++j) {
            x.col(static_cast<Eigen::Index>(j)) = data[idx[j]].x;
            y[j] = data[idx[j]].label;
        }
    };
    Matrix x_train, x_val;
    std::vector<std::size_t> y_train, y_val;
    pack(train_idx, x_train, y_train);
    pack(val_idx, x_val, y_val);

    LearnerModel model = LearnerModel::zeros(cfg.arch, classes, static_cast<std::size_t>(d), cfg.hidden);
    if (cfg.arch == Architecture::OneHidden) {
        const double s_in = 1.0 / std::sqrt(static_cast<double>(d));
        for (Eigen::Index j = 0; j < model.in_w.cols(); ++j)
            for (Eigen::Index i = 0; i < model.in_w.rows(); ++i) model.in_w(i, j) = s_in * rng.normal();
        const double s_out = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
        for (Eigen::Index j = 0; j < model.out_w.cols(); ++j)
            for (Eigen::Index i = 0; i < model.out_w.rows(); ++i) model.out_w(i, j) = s_out * rng.normal();
    }

    detail::Gradients grads;
    detail::Gradients velocity{Matrix::Zero(model.in_w.rows(), model.in_w.cols()), Vector::Zero(model.in_b.size()),
                               Matrix::Zero(model.out_w.rows(), model.out_w.cols()), Vector::Zero(model.out_b.size())};
    const bool has_val = n_val > 0;
    LearnerModel best = model;
    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    const std::size_t n_train = train_idx.size();
    std::vector<std::size_t> perm(n_train);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::vector<std::size_t> batch_labels;

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        rng.shuffle(perm);
        for (std::size_t start = 0; start < n_train; start += cfg.batch_size) {
            const std::size_t stop = std::min(n_train, start + cfg.batch_size);
            const std::span<const std::size_t> cols(perm.data() + start, stop - start);
            const Matrix xb = detail::gather_columns(x_train, cols);
            batch_labels.resize(cols.size());
            for (std::size_t j = 0; j < cols.size(); ++j) batch_labels[j] = y_train[cols[j]];
            detail::batch_objective(model, xb, batch_labels, cfg.weight_decay, &grads);
            velocity.out_w = cfg.momentum * velocity.out_w - cfg.learning_rate * grads.out_w;
            velocity.out_b = cfg.momentum * velocity.out_b - cfg.learning_rate * grads.out_b;
            model.out_w += velocity.out_w;
            model.out_b += velocity.out_b;
            if (cfg.arch == Architecture::OneHidden) {
                velocity.in_w = cfg.momentum * velocity.in_w - cfg.learning_rate * grads.in_w;
                velocity.in_b = cfg.momentum * velocity.in_b - cfg.learning_rate * grads.in_b;
                model.in_w += velocity.in_w;
                model.in_b += velocity.in_b;
            }
        }
        if (!model.parameters_finite()) break;  // diverged: keep the best finite parameters

        const double train_loss = detail::batch_objective(model, x_train, y_train, cfg.weight_decay, nullptr);
        const double monitored = has_val ? detail::batch_objective(model, x_val, y_val, 0.0, nullptr) : train_loss;
        if (trace != nullptr) {
            trace->train_loss.push_back(train_loss);
            if (has_val) trace->val_loss.push_back(monitored);
        }
        if (monitored < best_loss) {
            best_loss = monitored;
            best = model;
            since_best = 0;
            if (trace != nullptr) trace->best_epoch = epoch;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Checkpoint format: a header line "dal-learner 1 <arch> <classes> <input_dim>
// <hidden>" followed by every parameter (column-major, in_w in_b out_w out_b)
// as whitespace-separated decimal numbers with full round-trip precision.
// ---------------------------------------------------------------------------

inline void save_model(std::ostream& os, const LearnerModel& m) {
    os << "dal-learner 1 " << to_string(m.arch) << ' ' << m.classes << ' ' << m.input_dim << ' ' << m.hidden << '\n';
    os << std::setprecision(17);
    auto dump = [&os](const auto& block) {
        for (Eigen::Index i = 0; i < block.size(); ++i) os << block.data()[i] << (i + 1 == block.size() ? '\n' : ' ');
        if (block.size() == 0) os << '\n';
    };
    dump(m.in_w);
    dump(m.in_b);
    dump(m.out_w);
    dump(m.out_b);
}

inline LearnerModel load_model(std::istream& is) {
    std::string magic, arch;
    int version = 0;
    std::size_t classes = 0, input_dim = 0, hidden = 0;
    if (!(is >> magic >> version >> arch >> classes >> input_dim >> hidden) || magic != "dal-learner" || version != 1)
        throw InvalidInput("load_model: bad header");
    Architecture a;
    if (arch == "linear")
        a = Architecture::LinearSoftmax;
    else if (arch == "mlp")
        a = Architecture::OneHidden;
    else
        throw InvalidInput("load_model: unknown architecture '" + arch + "'");
    if (classes < 2 || input_dim < 1) throw InvalidInput("load_model: bad dimensions");
    LearnerModel m = LearnerModel::zeros(a, classes, input_dim, hidden);
    auto fill = [&is](auto& block) {
        for (Eigen::Index i = 0; i < block.size(); ++i)
            if (!(is >> block.data()[i])) throw InvalidInput("load_model: truncated parameters");
    };
    fill(m.in_w);
    fill(m.in_b);
    fill(m.out_w);
    fill(m.out_b);
    if (!m.parameters_finite()) throw InvalidInput("load_model: non-finite parameter");
    return m;
}

}  // namespace dal
