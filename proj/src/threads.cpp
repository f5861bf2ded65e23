#include "confmatch/threads.hpp"

#include <cstdlib>
#include <string>

namespace confmatch {

int thread_cap()
{
    const char* s = std::getenv("CONFMATCH_THREADS");
    if (!s || !*s) return 1;
    try {
        int n = std::stoi(s);
        return n > 0 ? n : 1;
    } catch (...) {
        return 1;
    }
}

}  // namespace confmatch
