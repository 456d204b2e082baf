#include "polynet/error.hpp"
#include "polynet/rigidrep.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace polynet {

void write_rigid_set(std::ostream& os, const RigidSet& rigid) {
  std::ostringstream line;
  line << std::setprecision(17);
  for (const auto& [key, t] : rigid) {
    line.str({});
    line << key[0] << ' ' << key[1] << ' ' << key[2] << ' ' << t.d1 << ' ' << t.d2 << ' ' << t.theta << ' '
         << t.phi << ' ' << t.psi.first << ' ' << t.psi.second << '\n';
    os << line.str();
  }
}

RigidSet read_rigid_set(std::istream& is) {
  RigidSet out;
  std::string text;
  int line_no = 0;
  while (std::getline(is, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(text);
    NodeTriple key{};
    RigidTuple t;
    if (!(fields >> key[0] >> key[1] >> key[2] >> t.d1 >> t.d2 >> t.theta >> t.phi >> t.psi.first >> t.psi.second))
      throw Error(ErrorCode::Schema, "rigid set line " + std::to_string(line_no) + " is malformed");
    t.type = t.psi.first == t.psi.second ? PathType::Inner : PathType::Cross;
    if (!out.emplace(key, t).second)
      throw Error(ErrorCode::Schema, "rigid set line " + std::to_string(line_no) + " repeats a node triple");
  }
  return out;
}

}  // namespace polynet
