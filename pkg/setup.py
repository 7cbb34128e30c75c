from setuptools import setup, find_packages

setup(
    name = 'npu_gemm_workbench',
    version = '0.1.0',
    description = """Tiling compiler, NPU simulator and GEMM offload workbench for GPT-2 training""",
    author = "NPU GEMM workbench developers",
    url = 'https://github.com/npu-gemm-workbench/npu_gemm_workbench',
    packages = find_packages(exclude=['tests', 'tests.*']),
    include_package_data=True,
    package_data={
        'npu_gemm_workbench.modules.gpt2_workbench': ['configs/*.cfg'],
    },
    entry_points={
        'console_scripts': [
              'npu-gemm = npu_gemm_workbench.cli:console_main',
              'tiling-planner = npu_gemm_workbench.modules.tiling_planner.__main__:main',
              'layout-engine = npu_gemm_workbench.modules.layout_engine.__main__:main',
              'kernel-emulator = npu_gemm_workbench.modules.kernel_emulator.__main__:main',
              'npu-simulator = npu_gemm_workbench.modules.npu_simulator.__main__:main',
              'gemm-offload = npu_gemm_workbench.modules.gemm_offload.__main__:main',
              'gpt2-train-toy = npu_gemm_workbench.modules.gpt2_workbench.__main__:main',
              'gpt2-flops = npu_gemm_workbench.modules.gpt2_workbench.__main__:main_flops',
              'gpt2-size-sweep = npu_gemm_workbench.scripts.gpt2_size_sweep:main'
        ],
    },
    setup_requires=['pytest-runner'],
    install_requires=[
        'matplotlib',
        'scipy',
        'numpy',
        'pandas',
        'GitPython',
        'argschema==1.*',
        'marshmallow==2.*',
        'python-dotenv',
        'simpy',
        'joblib',
        'psutil'
    ],
)
