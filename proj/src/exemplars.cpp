#include "approval/exemplars.hpp"

#include <algorithm>
#include <numeric>

namespace approval
{

ExemplarSet export_exemplars(const Eigen::Ref<const Matrix>& scores, const std::vector<std::string>& post_ids, int k)
{
    const Index n = scores.rows();
    if (static_cast<Index>(post_ids.size()) != n)
        fail(ErrorKind::ShapeError, "one post id per score row is required");
    ExemplarSet set;
    set.k = k;
    if (2 * static_cast<Index>(k) > n)
    {
        set.k = static_cast<int>(n / 2);
        set.reduced = true;
    }
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index c = 0; c < scores.cols(); ++c)
    {
        std::iota(order.begin(), order.end(), Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
            if (scores(a, c) != scores(b, c))
                return scores(a, c) > scores(b, c);
            return post_ids[static_cast<std::size_t>(a)] < post_ids[static_cast<std::size_t>(b)];
        });
        ComponentExemplars ex;
        ex.component = c;
        ex.top.assign(order.begin(), order.begin() + set.k);
        std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
            if (scores(a, c) != scores(b, c))
                return scores(a, c) < scores(b, c);
            return post_ids[static_cast<std::size_t>(a)] < post_ids[static_cast<std::size_t>(b)];
        });
        ex.bottom.assign(order.begin(), order.begin() + set.k);
        set.components.push_back(std::move(ex));
    }
    return set;
}

std::string render_exemplars(const ExemplarSet& set, const Eigen::Ref<const Matrix>& scores,
                             const std::vector<std::string>& post_ids, const std::vector<std::string>& texts,
                             std::size_t max_chars)
{
    auto snippet = [&](Index row) {
        std::string t = row < static_cast<Index>(texts.size()) ? texts[static_cast<std::size_t>(row)] : std::string();
        for (auto& ch : t)
            if (ch == '\n' || ch == '\r' || ch == '|')
                ch = ' ';
        if (t.size() > max_chars)
            t = t.substr(0, max_chars) + "...";
        return t;
    };
    std::string out = "# Semantic style exemplars\n\n";
    if (set.reduced)
        out += "k reduced to " + std::to_string(set.k) + " (fewer than 2k posts).\n\n";
    for (const auto& ex : set.components)
    {
        const std::string pc = "PC" + std::to_string(ex.component + 1);
        for (int side = 0; side < 2; ++side)
        {
            const auto& rows = side == 0 ? ex.top : ex.bottom;
            out += "## " + pc + (side == 0 ? " top " : " bottom ") + std::to_string(set.k) + "\n\n";
            out += "| rank | post_id | score | text |\n|---|---|---|---|\n";
            for (std::size_t r = 0; r < rows.size(); ++r)
                out += "| " + std::to_string(r + 1) + " | " + post_ids[static_cast<std::size_t>(rows[r])] + " | " +
                       format_fixed(scores(rows[r], ex.component), 4) + " | " + snippet(rows[r]) + " |\n";
            out += "\n";
        }
    }
    return out;
}

} // namespace approval
