#ifndef SZM_POS_HPP
#define SZM_POS_HPP

#include <memory>
#include <string>

namespace szm {

// Source position attached to every parsed node. Synthetic nodes (built by
// the checker) carry line == 0 and display as "<internal>".
struct SourcePos {
  std::shared_ptr<const std::string> file;
  int line = 0;
  int col = 0;

  bool known() const { return line > 0; }
  std::string str() const {
    if (!known()) return "<internal>";
    return (file ? *file : std::string("?")) + ":" + std::to_string(line) +
           ":" + std::to_string(col);
  }
};

inline SourcePos synthetic_pos() { return SourcePos{}; }

}  // namespace szm

#endif
