#ifndef SIDGP_DIAGNOSTICS_HPP
#define SIDGP_DIAGNOSTICS_HPP

#include <cstddef>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace sidgp {

// Thread-safe sink for non-fatal numerical events. Each distinct category is
// counted; the first few messages per category are kept verbatim.
class Diagnostics {
 public:
  static constexpr std::size_t kMessagesPerCategory = 5;

  void warn(const std::string& category, const std::string& message);

  std::size_t count(const std::string& category) const;
  std::size_t total() const;
  std::map<std::string, std::size_t> counts() const;

  // One line per category, e.g. "ess_shrink_underflow x3: node (1,1) ...".
  std::vector<std::string> summary() const;

  void merge(const Diagnostics& other);
  void clear();

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::size_t> counts_;
  std::map<std::string, std::vector<std::string>> messages_;
};

}  // namespace sidgp

#endif  // SIDGP_DIAGNOSTICS_HPP
