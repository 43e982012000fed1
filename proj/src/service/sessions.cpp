#include <cstdio>
#include <random>

#include "gamtalk/service/service.hpp"

namespace gamtalk::service {

SessionStore::SessionStore(std::chrono::minutes idle, Clock clock) : idle_(idle), clock_(std::move(clock))
{
    if (!clock_)
        clock_ = [] { return std::chrono::steady_clock::now(); };
}

std::shared_ptr<Session> SessionStore::acquire(const std::string& id, bool& created)
{
    std::lock_guard lock(mutex_);
    const auto now = clock_();
    auto it = sessions_.find(id);
    if (it != sessions_.end() && now - it->second->last_used > idle_) {
        sessions_.erase(it);
        it = sessions_.end();
    }
    created = it == sessions_.end();
    if (created)
        it = sessions_.emplace(id, std::make_shared<Session>()).first;
    it->second->last_used = now;
    return it->second;
}

std::size_t SessionStore::size()
{
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

void SessionStore::sweep()
{
    std::lock_guard lock(mutex_);
    const auto now = clock_();
    for (auto it = sessions_.begin(); it != sessions_.end();) {
        if (now - it->second->last_used > idle_)
            it = sessions_.erase(it);
        else
            ++it;
    }
}

std::string SessionStore::new_id()
{
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    std::lock_guard lock(mutex_);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%08llx%08llx", static_cast<unsigned long long>(++counter_ & 0xffffffffu),
                  static_cast<unsigned long long>(rng() & 0xffffffffu));
    return buf;
}

} // namespace gamtalk::service
