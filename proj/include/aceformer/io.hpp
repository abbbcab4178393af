#pragma once

#include <string>

namespace aceformer {

// Write to a temp file in the target directory, then rename over the
// destination, so readers never observe a partial file.
void atomic_write_file(const std::string& path, const std::string& contents);

std::string read_file(const std::string& path);

}  // namespace aceformer
