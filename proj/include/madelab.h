/* C interface to the madelab experiment runner.
 *
 * Usage: open a handle from a JSON config file, optionally override seeds,
 * output directory, or worker count, then run. All functions returning int
 * use 0 for success; on failure madelab_last_error() describes the problem
 * for the calling thread. Handles are not thread-safe; use one per thread.
 */
#ifndef MADELAB_H
#define MADELAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define MADELAB_OK 0
#define MADELAB_ERR_ARGUMENT 1 /* bad handle, config, or parameter */
#define MADELAB_ERR_IO 2       /* file could not be read or written */
#define MADELAB_ERR_RUN 3      /* experiment executed but a run failed */

typedef struct madelab_experiment madelab_experiment;

/* Parses and validates the config file. Returns NULL on failure (see
 * madelab_last_error). The handle must be released with madelab_close. */
madelab_experiment* madelab_open(const char* config_path);

/* Parses a config from a JSON string instead of a file. */
madelab_experiment* madelab_open_text(const char* config_json);

void madelab_close(madelab_experiment* handle);

/* Overrides applied on top of the parsed config. */
int madelab_set_seeds(madelab_experiment* handle, const uint64_t* seeds, size_t count);
int madelab_set_output_dir(madelab_experiment* handle, const char* dir);
int madelab_set_workers(madelab_experiment* handle, int workers);

/* Fully resolved config as JSON; pointer is owned by the handle and valid
 * until the next call on it. */
const char* madelab_resolved_config(madelab_experiment* handle);

/* Runs the experiment and writes all artifacts. */
int madelab_run(madelab_experiment* handle);

/* Last error message for this thread; empty string if none. */
const char* madelab_last_error(void);

const char* madelab_version(void);

#ifdef __cplusplus
}
#endif

#endif /* MADELAB_H */
