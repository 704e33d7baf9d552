#include "aia/black_box.hpp"

#include <atomic>

#include "aia/gcn.hpp"

namespace aia {

struct BlackBoxHandle::Impl {
    explicit Impl(GcnModel m) : model(std::move(m)) {}
    const GcnModel model;
    mutable std::atomic<std::size_t> queries{0};
};

BlackBoxHandle::BlackBoxHandle(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
BlackBoxHandle::BlackBoxHandle(BlackBoxHandle&&) noexcept = default;
BlackBoxHandle& BlackBoxHandle::operator=(BlackBoxHandle&&) noexcept = default;
BlackBoxHandle::~BlackBoxHandle() = default;

Matrix BlackBoxHandle::query(const Matrix& features, const SparseGraph& graph) const {
    const auto& model = impl_->model;
    if (static_cast<std::size_t>(features.cols()) != model.input_dim()) {
        throw QueryError("query: features have " + std::to_string(features.cols()) + " columns, model expects " +
                         std::to_string(model.input_dim()));
    }
    if (static_cast<std::size_t>(features.rows()) != graph.num_nodes()) {
        throw QueryError("query: " + std::to_string(features.rows()) + " feature rows for a graph of " +
                         std::to_string(graph.num_nodes()) + " nodes");
    }
    if (!features.allFinite()) throw QueryError("query: non-finite feature value");
    Matrix out = model.posteriors(gcn_operator(graph), features);
    impl_->queries.fetch_add(1, std::memory_order_relaxed);
    return out;
}

std::size_t BlackBoxHandle::query_count() const { return impl_->queries.load(std::memory_order_relaxed); }
std::size_t BlackBoxHandle::input_dim() const { return impl_->model.input_dim(); }
std::size_t BlackBoxHandle::num_classes() const { return impl_->model.num_classes(); }

BlackBoxHandle seal(GcnModel model) {
    return BlackBoxHandle(std::make_unique<BlackBoxHandle::Impl>(std::move(model)));
}

BlackBoxHandle train_black_box(const Dataset& ds, const Split& split, const GcnHyper& hyper, TrainReport* report) {
    TrainedGcn trained = train_gcn(ds, split, hyper);
    if (report) *report = trained.report;
    return seal(std::move(trained.model));
}

}  // namespace aia
