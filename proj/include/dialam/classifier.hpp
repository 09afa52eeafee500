#pragma once

#include "dialam/dataset.hpp"
#include "dialam/linear_model.hpp"
#include "dialam/task.hpp"

#include <filesystem>
#include <memory>
#include <span>
#include <vector>

namespace dialam {

/// A text-pair classifier for one task. Implementations are immutable after
/// construction and safe to call concurrently.
class Classifier
{
public:
    virtual ~Classifier() = default;

    virtual const TaskSpec& task() const noexcept = 0;

    /// One distribution per instance, in input order.
    virtual std::vector<LabelDistribution> classify(std::span<const PairInstance> instances) const = 0;
};

class LinearClassifier final : public Classifier
{
public:
    explicit LinearClassifier(LinearModel model) : m_model(std::move(model)) {}

    static std::shared_ptr<LinearClassifier> load(const std::filesystem::path& path)
    {
        return std::make_shared<LinearClassifier>(load_model(path));
    }

    const TaskSpec& task() const noexcept override { return m_model.task; }
    const LinearModel& model() const noexcept { return m_model; }

    std::vector<LabelDistribution> classify(std::span<const PairInstance> instances) const override
    {
        std::vector<LabelDistribution> out;
        out.reserve(instances.size());
        for (const auto& inst : instances)
            out.push_back(predict(m_model, inst));
        return out;
    }

private:
    LinearModel m_model;
};

} // namespace dialam
