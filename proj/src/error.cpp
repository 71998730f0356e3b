#include "dehaze/error.hpp"

namespace dehaze {

void throw_shape(const std::string& what) { throw ShapeError(what); }

void throw_domain(const std::string& what) { throw DomainError(what); }

}  // namespace dehaze
