from setuptools import setup, find_packages

setup(
    name="qsigma_manager",
    version="0.1.0",
    description="다단계 Q(sigma) 강화학습 실험 관리자",
    author="ML Team",
    packages=find_packages(include=["qsigma_manager", "qsigma_manager.*"]),
    package_data={"qsigma_manager": ["configs/*.ini"]},
    install_requires=[
        "numpy>=1.20.0",
        "pandas>=1.3.0",
        "psutil>=5.8.0",
    ],
    extras_require={
        "tests": [
            "pytest>=7.0",
            "hypothesis>=6.0",
            "scipy>=1.7.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "qsigma-manager=qsigma_manager.main_experiment_manager:main",
        ],
    },
    python_requires=">=3.8",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
    ],
)
