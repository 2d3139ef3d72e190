"""Multi-transmitter CP-OFDM radar: pulse-set design, scene simulation and
interference-free range reconstruction, with matched-filter baselines."""

from .dspcore import cyclic_shift, dft_unitary, idft_unitary, linear_convolve, papr_db
from .cod import (
    OrthogonalDesign,
    alamouti_design,
    cod4_design,
    cod_design,
    cod_rate,
    place_pulses,
    verify_cod,
    verify_flat_unitary,
)
from .waveform import (
    WaveformSet,
    load_waveform_set,
    save_waveform_set,
    verify_waveform_set,
    write_waveform_csv,
)
from .paraunitary import (
    ParaunitaryFactors,
    PolyphaseMatrix,
    load_factors,
    paraunitary_deviation,
    polyphase_to_pulses,
    random_factors,
    save_factors,
    synthesize_polyphase,
)
from .icf import (
    DesignResult,
    IcfConfig,
    MonteCarloResult,
    icf_design,
    monte_carlo_cdf,
    snr_degradation_db,
    time_clip,
)
from .scene import (
    SPEED_OF_LIGHT,
    RcsRealization,
    SceneConfig,
    delays_from_geometry,
    load_scene_file,
    sample_rcs,
    synthesize_all_received,
    synthesize_received,
)
from .reconstruct import (
    RangeEstimate,
    phase_compensate,
    reconstruct_all,
    recover_rcs,
    separate_transmitters,
    snr_max_theory_db,
    snr_post_theory_db,
    snr_pre_theory_db,
    trim_and_demodulate,
)
from .baselines import (
    CodeSet,
    fd_lfm_simulate,
    lfm_pulse,
    load_code_set,
    matched_filter_range,
    p4_code,
    p4_code_set,
    pcode_simulate,
)

__version__ = "0.1.0"
