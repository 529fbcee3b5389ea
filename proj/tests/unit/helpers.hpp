#pragma once

#include "approval/common.hpp"
#include "approval/corpus.hpp"

#include <doctest.h>

#include <functional>
#include <string>

namespace testutil
{

inline approval::corpus::PostRecord post(std::string id, std::string sub, std::int64_t t, std::int64_t score = 0,
                                         std::int64_t awards = 0, std::int64_t gold = 0, bool removed = false,
                                         std::string author = "a")
{
    approval::corpus::PostRecord p;
    p.post_id = std::move(id);
    p.subreddit = std::move(sub);
    p.author_id = std::move(author);
    p.created_utc = t;
    p.score = score;
    p.n_awards = awards;
    p.n_gold = gold;
    p.removed = removed;
    return p;
}

inline approval::ErrorKind error_kind(const std::function<void()>& f)
{
    try
    {
        f();
    }
    catch (const approval::Error& e)
    {
        return e.kind();
    }
    FAIL("expected an approval::Error");
    return approval::ErrorKind::IoError;
}

} // namespace testutil
