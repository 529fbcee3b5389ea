#ifndef APPROVAL_EXEMPLARS_HPP
#define APPROVAL_EXEMPLARS_HPP

#include "approval/common.hpp"

#include <string>
#include <vector>

namespace approval
{

struct ComponentExemplars
{
    Index component = 0; // 0-based
    std::vector<Index> top;    // row indices, highest score first
    std::vector<Index> bottom; // row indices, lowest score first
};

struct ExemplarSet
{
    int k = 30;
    bool reduced = false; // k was cut to floor(n/2)
    std::vector<ComponentExemplars> components;
};

/// Top-k and bottom-k rows per score column. Stable ordering; equal scores
/// are ordered by ascending post_id on both ends.
ExemplarSet export_exemplars(const Eigen::Ref<const Matrix>& scores, const std::vector<std::string>& post_ids,
                             int k = 30);

/// Markdown listing per component, ready to paste into an interpretation prompt.
std::string render_exemplars(const ExemplarSet& set, const Eigen::Ref<const Matrix>& scores,
                             const std::vector<std::string>& post_ids, const std::vector<std::string>& texts,
                             std::size_t max_chars = 280);

} // namespace approval

#endif // APPROVAL_EXEMPLARS_HPP
