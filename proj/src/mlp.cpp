#include "aia/mlp.hpp"

#include <cmath>

#include "aia/random.hpp"

namespace aia {

namespace {

Matrix affine(const Matrix& x, const MlpAttackModel::Layer& l) {
    return (x * l.weight).rowwise() + l.bias.transpose();
}

Matrix softmax(const Matrix& z) {
    Matrix p = z.colwise() - z.rowwise().maxCoeff();
    p = p.array().exp().matrix();
    const Vector s = p.rowwise().sum();
    return s.cwiseInverse().asDiagonal() * p;
}

MlpAttackModel::Layer init_layer(Eigen::Index in, Eigen::Index out, rng::Engine& engine) {
    // He-uniform for ReLU inputs.
    const double limit = std::sqrt(6.0 / static_cast<double>(in));
    MlpAttackModel::Layer l{Matrix(in, out), Vector::Zero(out)};
    for (Eigen::Index i = 0; i < in; ++i) {
        for (Eigen::Index j = 0; j < out; ++j) l.weight(i, j) = rng::uniform(engine, -limit, limit);
    }
    return l;
}

struct Adam {
    Matrix m;
    Matrix v;
    template <typename Derived>
    void step(Eigen::MatrixBase<Derived>& param, const Matrix& grad, double lr, std::size_t t) {
        constexpr double b1 = 0.9;
        constexpr double b2 = 0.999;
        constexpr double eps = 1e-8;
        if (m.size() == 0) {
            m = Matrix::Zero(grad.rows(), grad.cols());
            v = Matrix::Zero(grad.rows(), grad.cols());
        }
        m = b1 * m + (1.0 - b1) * grad;
        v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
        param.derived().array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    }
};

}  // namespace

Matrix MlpAttackModel::predict_proba(const Matrix& x) const {
    if (static_cast<std::size_t>(x.cols()) != input_dim()) {
        throw InputError("mlp: input has " + std::to_string(x.cols()) + " columns, expected " +
                         std::to_string(input_dim()));
    }
    const Matrix h1 = affine(x, layers_[0]).cwiseMax(0.0);
    const Matrix h2 = affine(h1, layers_[1]).cwiseMax(0.0);
    return softmax(affine(h2, layers_[2]));
}

double MlpAttackModel::accuracy(const Matrix& x, std::span<const int> labels) const {
    const Matrix p = predict_proba(x);
    std::size_t hits = 0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        const int pred = p(i, 1) > p(i, 0) ? 1 : 0;
        if (pred == labels[static_cast<std::size_t>(i)]) ++hits;
    }
    return p.rows() ? static_cast<double>(hits) / static_cast<double>(p.rows()) : 0.0;
}

MlpAttackModel train_mlp(const Matrix& inputs, std::span<const int> labels, const MlpHyper& hyper) {
    if (static_cast<std::size_t>(inputs.rows()) != labels.size()) {
        throw InputError("train_mlp: " + std::to_string(inputs.rows()) + " samples but " +
                         std::to_string(labels.size()) + " labels");
    }
    if (!inputs.allFinite()) throw InputError("train_mlp: non-finite input");
    bool seen[2] = {false, false};
    for (int l : labels) {
        if (l != 0 && l != 1) throw InputError("train_mlp: labels must be 0 or 1");
        seen[l] = true;
    }
    if (!seen[0] || !seen[1]) throw TrainingError("train_mlp: need at least one sample of each class");

    auto engine = rng::make_engine(hyper.seed, 0x3a1);
    const Eigen::Index d = inputs.cols();
    std::array<MlpAttackModel::Layer, 3> layers{
        init_layer(d, static_cast<Eigen::Index>(hyper.hidden1), engine),
        init_layer(static_cast<Eigen::Index>(hyper.hidden1), static_cast<Eigen::Index>(hyper.hidden2), engine),
        init_layer(static_cast<Eigen::Index>(hyper.hidden2), 2, engine)};

    const Eigen::Index n = inputs.rows();
    Matrix onehot = Matrix::Zero(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) onehot(i, labels[static_cast<std::size_t>(i)]) = 1.0;

    std::array<Adam, 3> w_opt;
    std::array<Adam, 3> b_opt;
    for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
        const Matrix z1 = affine(inputs, layers[0]);
        const Matrix h1 = z1.cwiseMax(0.0);
        const Matrix z2 = affine(h1, layers[1]);
        const Matrix h2 = z2.cwiseMax(0.0);
        const Matrix p = softmax(affine(h2, layers[2]));

        const Matrix g3 = (p - onehot) / static_cast<double>(n);
        const Matrix dw3 = h2.transpose() * g3;
        const Matrix db3 = g3.colwise().sum().transpose();
        Matrix g2 = g3 * layers[2].weight.transpose();
        g2.array() *= (z2.array() > 0.0).cast<double>();
        const Matrix dw2 = h1.transpose() * g2;
        const Matrix db2 = g2.colwise().sum().transpose();
        Matrix g1 = g2 * layers[1].weight.transpose();
        g1.array() *= (z1.array() > 0.0).cast<double>();
        const Matrix dw1 = inputs.transpose() * g1;
        const Matrix db1 = g1.colwise().sum().transpose();

        const Matrix* dws[3] = {&dw1, &dw2, &dw3};
        const Matrix* dbs[3] = {&db1, &db2, &db3};
        for (std::size_t k = 0; k < 3; ++k) {
            w_opt[k].step(layers[k].weight, *dws[k], hyper.learning_rate, epoch);
            b_opt[k].step(layers[k].bias, *dbs[k], hyper.learning_rate, epoch);
        }
    }
    return MlpAttackModel(std::move(layers));
}

}  // namespace aia
