#include "sidgp/diagnostics.hpp"

namespace sidgp {

void Diagnostics::warn(const std::string& category, const std::string& message) {
  std::lock_guard lock(mutex_);
  ++counts_[category];
  auto& kept = messages_[category];
  if (kept.size() < kMessagesPerCategory) kept.push_back(message);
}

std::size_t Diagnostics::count(const std::string& category) const {
  std::lock_guard lock(mutex_);
  auto it = counts_.find(category);
  return it == counts_.end() ? 0 : it->second;
}

std::size_t Diagnostics::total() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& [_, c] : counts_) n += c;
  return n;
}

std::map<std::string, std::size_t> Diagnostics::counts() const {
  std::lock_guard lock(mutex_);
  return counts_;
}

std::vector<std::string> Diagnostics::summary() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [category, c] : counts_) {
    std::string line = category + " x" + std::to_string(c);
    const auto& kept = messages_.at(category);
    if (!kept.empty()) line += ": " + kept.front();
    out.push_back(std::move(line));
  }
  return out;
}

void Diagnostics::merge(const Diagnostics& other) {
  if (&other == this) return;
  std::scoped_lock lock(mutex_, other.mutex_);
  for (const auto& [category, c] : other.counts_) counts_[category] += c;
  for (const auto& [category, msgs] : other.messages_) {
    auto& kept = messages_[category];
    for (const auto& m : msgs) {
      if (kept.size() >= kMessagesPerCategory) break;
      kept.push_back(m);
    }
  }
}

void Diagnostics::clear() {
  std::lock_guard lock(mutex_);
  counts_.clear();
  messages_.clear();
}

}  // namespace sidgp
