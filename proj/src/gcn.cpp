#include "aia/gcn.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "aia/random.hpp"

namespace aia {

GcnModel::GcnModel(Matrix w0, Matrix w1, GcnHyper hyper)
    : w0_(std::move(w0)), w1_(std::move(w1)), hyper_(hyper) {
    if (w0_.cols() != w1_.rows()) {
        throw ParameterError("GcnModel: W0 is " + std::to_string(w0_.rows()) + "x" + std::to_string(w0_.cols()) +
                             " but W1 is " + std::to_string(w1_.rows()) + "x" + std::to_string(w1_.cols()));
    }
}

Matrix GcnModel::logits(const SparseMatrix& op, const Matrix& x) const {
    const Matrix hidden = (op * (x * w0_)).cwiseMax(0.0);
    return op * (hidden * w1_);
}

Matrix GcnModel::posteriors(const SparseMatrix& op, const Matrix& x) const { return softmax_rows(logits(op, x)); }

bool operator==(const GcnModel& a, const GcnModel& b) {
    return a.w0_.rows() == b.w0_.rows() && a.w0_.cols() == b.w0_.cols() && a.w1_.rows() == b.w1_.rows() &&
           a.w1_.cols() == b.w1_.cols() && a.w0_ == b.w0_ && a.w1_ == b.w1_ && a.hyper_.hidden == b.hyper_.hidden &&
           a.hyper_.learning_rate == b.hyper_.learning_rate && a.hyper_.epochs == b.hyper_.epochs &&
           a.hyper_.weight_decay == b.hyper_.weight_decay && a.hyper_.seed == b.hyper_.seed;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix p = logits.colwise() - logits.rowwise().maxCoeff();
    p = p.array().exp().matrix();
    const Vector sums = p.rowwise().sum();
    return sums.cwiseInverse().asDiagonal() * p;
}

GcnGradients gcn_loss_and_gradients(const GcnModel& model, const SparseMatrix& op, const Matrix& x,
                                    std::span<const std::int32_t> labels, std::span<const NodeId> ids) {
    if (ids.empty()) throw ParameterError("gcn_loss_and_gradients: no labelled nodes");
    const double wd = model.hyper().weight_decay;
    const Matrix ax = op * x;
    const Matrix z1 = ax * model.w0();
    const Matrix h = z1.cwiseMax(0.0);
    const Matrix ah = op * h;
    const Matrix p = softmax_rows(ah * model.w1());

    const double inv_n = 1.0 / static_cast<double>(ids.size());
    Matrix g2 = Matrix::Zero(p.rows(), p.cols());
    double ce = 0.0;
    for (NodeId id : ids) {
        const auto r = static_cast<Eigen::Index>(id);
        const auto y = static_cast<Eigen::Index>(labels[id]);
        ce -= std::log(p(r, y));
        g2.row(r) = p.row(r) * inv_n;
        g2(r, y) -= inv_n;
    }

    GcnGradients out;
    out.loss = ce * inv_n + 0.5 * wd * (model.w0().squaredNorm() + model.w1().squaredNorm());
    out.d_w1 = ah.transpose() * g2 + wd * model.w1();
    Matrix dz1 = op.transpose() * (g2 * model.w1().transpose());
    dz1.array() *= (z1.array() > 0.0).cast<double>();
    out.d_w0 = ax.transpose() * dz1 + wd * model.w0();
    return out;
}

double accuracy(const Matrix& posteriors, std::span<const std::int32_t> labels, std::span<const NodeId> ids) {
    if (ids.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::size_t hits = 0;
    for (NodeId id : ids) {
        Eigen::Index best = 0;
        posteriors.row(static_cast<Eigen::Index>(id)).maxCoeff(&best);
        if (best == labels[id]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(ids.size());
}

namespace {

Matrix glorot(Eigen::Index rows, Eigen::Index cols, rng::Engine& engine) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng::uniform(engine, -limit, limit);
    }
    return m;
}

std::vector<NodeId> iota_ids(std::size_t n) {
    std::vector<NodeId> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = i;
    return ids;
}

}  // namespace

TrainedGcn train_gcn(const Dataset& ds, const Split& split, const GcnHyper& hyper) {
    if (split.train_ids.empty()) throw ParameterError("train_gcn: empty training set");
    if (!ds.features.allFinite()) throw DataError("train_gcn: non-finite features");
    if (hyper.hidden == 0) throw ParameterError("train_gcn: hidden width must be positive");

    const Dataset train = induced_dataset(ds, split.train_ids);
    const SparseMatrix op = gcn_operator(train.graph);
    const auto ids = iota_ids(train.num_nodes());

    auto engine = rng::make_engine(hyper.seed, 0x6c4);
    GcnModel model(glorot(static_cast<Eigen::Index>(ds.num_features()), static_cast<Eigen::Index>(hyper.hidden), engine),
                   glorot(static_cast<Eigen::Index>(hyper.hidden), static_cast<Eigen::Index>(ds.num_classes), engine),
                   hyper);

    Matrix w0 = model.w0();
    Matrix w1 = model.w1();
    double loss = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        const GcnModel current(w0, w1, hyper);
        const GcnGradients g = gcn_loss_and_gradients(current, op, train.features, train.labels, ids);
        loss = g.loss;
        if (!std::isfinite(loss) || !g.d_w0.allFinite() || !g.d_w1.allFinite()) {
            throw TrainingError("train_gcn: loss diverged at epoch " + std::to_string(epoch));
        }
        w0 -= hyper.learning_rate * g.d_w0;
        w1 -= hyper.learning_rate * g.d_w1;
    }
    TrainedGcn out{GcnModel(std::move(w0), std::move(w1), hyper), {}};
    out.report.final_loss = loss;
    out.report.train_accuracy = accuracy(out.model.posteriors(op, train.features), train.labels, ids);
    if (!split.test_ids.empty()) {
        const Dataset test = induced_dataset(ds, split.test_ids);
        out.report.test_accuracy =
            accuracy(out.model.posteriors(gcn_operator(test.graph), test.features), test.labels,
                     iota_ids(test.num_nodes()));
    }
    return out;
}

namespace {

constexpr const char* kMagic = "aia-gcn-checkpoint";
constexpr int kVersion = 1;

void write_matrix(std::ostream& out, const char* name, const Matrix& m) {
    out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    char buf[40];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%a", m(i, j));
            out << (j ? " " : "") << buf;
        }
        out << '\n';
    }
}

Matrix read_matrix(std::istream& in, const std::string& expected, const std::string& path) {
    std::string name;
    Eigen::Index rows = -1;
    Eigen::Index cols = -1;
    if (!(in >> name >> rows >> cols) || name != expected || rows < 0 || cols < 0) {
        throw LoadError(path + ": expected '" + expected + " <rows> <cols>' header");
    }
    Matrix m(rows, cols);
    std::string tok;
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            if (!(in >> tok)) throw LoadError(path + ": truncated matrix " + expected);
            char* end = nullptr;
            m(i, j) = std::strtod(tok.c_str(), &end);
            if (end != tok.c_str() + tok.size()) throw LoadError(path + ": bad value '" + tok + "' in " + expected);
        }
    }
    return m;
}

}  // namespace

void save_checkpoint(const GcnModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write checkpoint " + path.string());
    const auto& h = model.hyper();
    char lr[40];
    char wd[40];
    std::snprintf(lr, sizeof lr, "%a", h.learning_rate);
    std::snprintf(wd, sizeof wd, "%a", h.weight_decay);
    out << kMagic << ' ' << kVersion << '\n';
    out << "hyper " << h.hidden << ' ' << lr << ' ' << h.epochs << ' ' << wd << ' ' << h.seed << '\n';
    write_matrix(out, "W0", model.w0());
    write_matrix(out, "W1", model.w1());
}

GcnModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open checkpoint " + path.string());
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != kMagic) throw LoadError(path.string() + ": not a GCN checkpoint");
    if (version != kVersion) throw LoadError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
    std::string tag;
    std::string lr;
    std::string wd;
    GcnHyper h;
    if (!(in >> tag >> h.hidden >> lr >> h.epochs >> wd >> h.seed) || tag != "hyper") {
        throw LoadError(path.string() + ": malformed hyper line");
    }
    h.learning_rate = std::strtod(lr.c_str(), nullptr);
    h.weight_decay = std::strtod(wd.c_str(), nullptr);
    Matrix w0 = read_matrix(in, "W0", path.string());
    Matrix w1 = read_matrix(in, "W1", path.string());
    return GcnModel(std::move(w0), std::move(w1), h);
}

}  // namespace aia
