// Test meshes come from the library's synthetic generators; this TU exists so
// the support library always has at least one object file.
#include "untrim/synthetic.hpp"
