#pragma once

namespace confmatch {

// Thread cap from CONFMATCH_THREADS; unset or 0 means sequential.
int thread_cap();

}  // namespace confmatch
