#pragma once

#include <stdexcept>
#include <string>

namespace treelab {

// A computation left the configured ordinal ceiling or exhausted an allocator.
struct OverflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed textual input (ordinal strings, schema files, configs).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An operation was called outside its documented domain. The message names
// the violated clause so failures shrink to the responsible hypothesis.
struct PreconditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A certified conclusion failed to verify: the finite surrogate diverged from
// the theorem it models. These are recorded, never patched over.
struct FidelityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace treelab
