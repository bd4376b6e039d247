"""
Closed-form metrics for the reference VR link
=============================================

A 1 MiB VR frame rendered 60 times a second travels over a 10 m, 1 Gbit/s
Ethernet cable through one switch (1 us) to a client that processes 205 000
packets per second.
"""

import dataclasses
import math

from vrnet import baseline_config, evaluate

headers, link, workload = baseline_config()
m = evaluate(headers, link, workload)

print(f"payload per packet     {m.max_payload} B")
print(f"packets per VR frame   {m.frames_per_vr_frame}")
print(f"data one-way latency   {m.eth_data_latency * 1e6:.3f} us")
print(f"ack one-way latency    {m.ack_latency * 1e6:.3f} us")
print(f"round trip             {m.total_latency * 1e6:.3f} us")
print(f"throughput             {m.throughput / 1e9:.4f} Gbit/s")
print(f"utilization            {m.utilization:.4f}")

###############################################################################
# Where does the round trip go? The 1/ppr processing term dominates.

terms = {
    "serialization (data+ack)": (link.data_packet_len + link.ack_packet_len) * 8 / link.data_rate,
    "propagation (x2)": 2 * link.cable_length / link.propagation_speed,
    "switch (x2)": 2 * link.switch_delay,
    "processing (x2)": 2 / link.ppr,
}
for name, t in terms.items():
    print(f"  {name:<26}{t * 1e6:7.3f} us  ({t / m.total_latency:5.1%})")

###############################################################################
# Removing the switch and the processing cost leaves wire time only; an
# infinitely fast link leaves the ceiling on per-packet throughput.

ideal = evaluate(headers, dataclasses.replace(link, ppr=math.inf, switch_delay=0.0), workload)
print(f"\nwire-only round trip   {ideal.total_latency * 1e6:.3f} us")
ceiling = evaluate(headers, dataclasses.replace(link, data_rate=math.inf), workload)
print(f"throughput ceiling     {ceiling.throughput / 1e9:.4f} Gbit/s")
