/* Copyright 2026 The ACV Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the advice-conformance toolkit.
 *
 * Every function returns an acv_status. On failure, acv_last_error() holds a
 * message for the calling thread until its next call into the library.
 * Strings returned through char** are owned by the caller and must be
 * released with acv_string_free.
 */

#ifndef ACV_ACV_H_
#define ACV_ACV_H_

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define ACV_API __declspec(dllexport)
#else
#define ACV_API __attribute__((visibility("default")))
#endif

typedef enum {
  ACV_OK = 0,
  ACV_ERR_INVALID_ARGUMENT = 1,
  ACV_ERR_PARSE = 2,
  ACV_ERR_EPISODE_TERMINATED = 3,
  ACV_ERR_ORACLE_UNRESOLVED = 4,
  ACV_ERR_DIVERGENCE = 5,
  ACV_ERR_SESSION_INCOMPLETE = 6,
  ACV_ERR_MISMATCH = 7,
  ACV_ERR_IO = 8,
  ACV_ERR_INTERNAL = 99
} acv_status;

typedef struct acv_report acv_report;
typedef struct acv_server acv_server;

ACV_API const char* acv_version(void);
ACV_API const char* acv_status_name(acv_status status);
ACV_API const char* acv_last_error(void);
ACV_API void acv_string_free(char* s);

/* Runs a simulated experiment. `config_json` keys (all optional): case,
 * players, p, seed, worldName, world, grounding, training, similarity,
 * shaping, oracleBasis, threshold. NULL means all defaults. */
ACV_API acv_status acv_simulate(const char* config_json, acv_report** out);
ACV_API acv_status acv_report_from_json(const char* json, acv_report** out);
ACV_API acv_status acv_report_to_json(const acv_report* report, char** out);
/* which: "human" | "agent" (final checkpoint); format: "json" | "dot". */
ACV_API acv_status acv_report_tree(const acv_report* report, const char* which,
                                   const char* format, char** out);
/* Text verdict; *conformed is set to 1 (CONFORMED) or 0 (DEVIATED). */
ACV_API acv_status acv_report_summary(const acv_report* report,
                                      double threshold, char** text,
                                      int* conformed);
ACV_API void acv_report_free(acv_report* report);

/* Compares two grounded-tree JSON documents on their shared node set. */
ACV_API acv_status acv_compare_trees(const char* human_json,
                                     const char* agent_json, double threshold,
                                     char** text, int* conformed);
/* Converts a grounded-tree JSON document to "json" or "dot". */
ACV_API acv_status acv_render_tree(const char* tree_json, const char* format,
                                   char** out);

ACV_API acv_status acv_server_create(const char* data_dir, acv_server** out);
/* port 0 picks an ephemeral port; the bound port is stored in *bound_port. */
ACV_API acv_status acv_server_bind(acv_server* server, const char* host,
                                   int port, int* bound_port);
/* Blocks until acv_server_stop is called from another thread. */
ACV_API acv_status acv_server_listen(acv_server* server);
ACV_API void acv_server_stop(acv_server* server);
/* Stops the server, waits for training jobs and releases it. */
ACV_API void acv_server_free(acv_server* server);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* ACV_ACV_H_ */
