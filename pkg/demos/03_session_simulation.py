"""
Simulating a streaming session
==============================

The event-driven simulator plays the whole session: handshake, streaming
with per-packet ACKs and health checks, then close. In stop-and-wait mode
every packet waits for its ACK, so each round trip should equal the closed
form exactly.
"""

import dataclasses

from vrnet import baseline_config, evaluate, run_session, validate_against_model

headers, link, workload = baseline_config()

###############################################################################
# A light load first: one 10-packet frame per second, so nothing ever queues.

light = dataclasses.replace(workload, fps=1.0, vr_frame_size=10 * 1432)
stats = run_session(headers, link, light, "stop_and_wait", duration=2.0)
report = validate_against_model(stats, evaluate(headers, link, light), tolerance=1e-6)
print(f"{report.samples} round trips, worst deviation {report.max_latency_deviation:.1e}, "
      f"goodput deviation {report.throughput_deviation:.1e} -> {'PASS' if report.passed else 'FAIL'}")

###############################################################################
# At the full 60 fps, stop-and-wait needs 733 round trips per frame, which is
# longer than the 16.7 ms frame period. Pipelining keeps up easily.

for mode in ("stop_and_wait", "pipelined"):
    s = run_session(headers, link, workload, mode, duration=1.0)
    print(f"{mode:<14} {s.achieved_fps:5.1f} fps   goodput {s.goodput / 1e9:.3f} Gbit/s   "
          f"{s.vr_frames_completed}/{s.vr_frames_generated} frames")
